#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "railqubo/model.hpp"
#include "railqubo/qubo.hpp"
#include "railqubo/schedule.hpp"
#include "railqubo/solvers.hpp"

namespace railqubo {

inline constexpr int kInstanceSchemaVersion = 1;
inline constexpr int kReportVersion = 1;

/// Malformed document. The message names the file and the line/column or the
/// JSON path of the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Parses and validates an instance document.
RailwayInstance parse_instance(const std::string& text, const std::string& source = "<input>");

/// A fixture name (see fixture_names) or a path to an instance document.
RailwayInstance load_instance(const std::string& name_or_path);

/// Canonical document text; parse_instance(serialize_instance(x)) reproduces x.
std::string serialize_instance(const RailwayInstance& instance);

std::vector<std::string> fixture_names();
/// Document text of a bundled fixture. Throws Error for unknown names.
const std::string& fixture_text(const std::string& name);

/// Solver report as an indented JSON document.
std::string report_json(const RailwayInstance& instance, const SolverReport& report);
/// Reads back the schedule stored in a report document.
Schedule schedule_from_report(const RailwayInstance& instance, const std::string& text);

/// One row per decision: train, station, delay, unavoidable and secondary delay,
/// scheduled and actual departure.
void write_schedule_csv(std::ostream& out, const RailwayInstance& instance, const Schedule& schedule);

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

/// Blocks occupied by more trains than they can hold, over [from, to).
struct ConflictMarker {
  BlockId block = 0;
  Minutes from = 0;
  Minutes to = 0;
  std::vector<TrainIndex> trains;
};

struct DiagramData {
  std::vector<Occupation> rows;  // grouped by train, in route order
  std::vector<ConflictMarker> conflicts;
};

/// Line blocks conflict when two half-open occupations [t_in, t_out) overlap;
/// stations when more trains than tracks are present at one instant.
DiagramData diagram_data(const RailwayInstance& instance, const Schedule& schedule);

void write_diagram_csv(std::ostream& out, const RailwayInstance& instance, const DiagramData& data);

/// Distance-time chart: time on x, blocks along the line on y.
void write_diagram_svg(std::ostream& out, const RailwayInstance& instance, const DiagramData& data,
                       const std::string& title);

}  // namespace railqubo
