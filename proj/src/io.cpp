#include "railqubo/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace railqubo {

namespace detail {
// Generated at configure time from data/*.json.
const std::vector<std::pair<std::string, std::string>>& bundled_fixtures();
}  // namespace detail

using nlohmann::json;

namespace {

// Walks a JSON document while tracking the path for error messages.
class Field {
 public:
  Field(const json& value, std::string path, const std::string& source)
      : v_(value), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_ + ": " + (path_.empty() ? "/" : path_) + ": " + what);
  }

  const json& raw() const { return v_; }
  bool has(const std::string& key) const { return v_.is_object() && v_.contains(key); }

  Field at(const std::string& key) const {
    if (!v_.is_object()) fail("expected an object");
    if (!v_.contains(key)) fail("missing field '" + key + "'");
    return {v_.at(key), path_ + "/" + key, source_};
  }
  Field at(std::size_t i) const { return {v_.at(i), path_ + "/" + std::to_string(i), source_}; }

  std::vector<Field> items() const {
    if (!v_.is_array()) fail("expected an array");
    std::vector<Field> out;
    for (std::size_t i = 0; i < v_.size(); ++i) out.push_back(at(i));
    return out;
  }
  std::vector<std::pair<std::string, Field>> members() const {
    if (!v_.is_object()) fail("expected an object");
    std::vector<std::pair<std::string, Field>> out;
    for (auto it = v_.begin(); it != v_.end(); ++it)
      out.emplace_back(it.key(), Field(it.value(), path_ + "/" + it.key(), source_));
    return out;
  }

  std::string str() const {
    if (!v_.is_string()) fail("expected a string");
    return v_.get<std::string>();
  }
  int integer() const {
    if (!v_.is_number_integer()) fail("expected an integer");
    return v_.get<int>();
  }
  double number() const {
    if (!v_.is_number()) fail("expected a number");
    return v_.get<double>();
  }
  Minutes time() const {
    try {
      return parse_hhmm(str());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
  }

 private:
  const json& v_;
  std::string path_;
  const std::string& source_;
};

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RailwayInstance parse_instance(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + location(text, e.byte) + ": malformed document");
  }
  const Field root(doc, "", source);
  const auto version = root.at("schema_version");
  if (version.integer() != kInstanceSchemaVersion)
    version.fail("unsupported schema version " + std::to_string(version.integer()));

  RailwayInstance inst;
  if (root.has("name")) inst.name = root.at("name").str();
  if (root.has("description")) inst.description = root.at("description").str();

  for (const auto& b : root.at("blocks").items()) {
    Block block;
    block.id = b.at("id").integer();
    const auto kind = b.at("kind");
    if (kind.str() == "station")
      block.kind = BlockKind::Station;
    else if (kind.str() == "line")
      block.kind = BlockKind::Line;
    else
      kind.fail("kind must be 'station' or 'line'");
    block.capacity = b.has("capacity") ? b.at("capacity").integer() : 1;
    if (b.has("name")) block.name = b.at("name").str();
    inst.blocks.push_back(block);
  }

  std::map<std::string, TrainIndex> index;
  for (const auto& t : root.at("trains").items()) {
    Train train;
    train.id = t.at("id").str();
    const auto dir = t.at("direction");
    if (dir.integer() != 0 && dir.integer() != 1) dir.fail("direction must be 0 or 1");
    train.direction = dir.integer() == 0 ? Direction::Dir0 : Direction::Dir1;
    train.initial_delay = t.has("initial_delay") ? t.at("initial_delay").integer() : 0;
    if (!index.emplace(train.id, inst.trains.size()).second) t.at("id").fail("duplicate train id");
    inst.trains.push_back(train);
  }
  const auto train_named = [&](const std::string& id, const Field& where) {
    const auto it = index.find(id);
    if (it == index.end()) where.fail("unknown train '" + id + "'");
    return it->second;
  };
  const auto train_of = [&](const Field& f) { return train_named(f.str(), f); };

  for (const auto& e : root.at("timetable").items()) {
    RouteEntry entry;
    entry.block = e.at("block").integer();
    entry.t_in = e.at("in").time();
    entry.t_out = e.at("out").time();
    entry.p_min = e.at("p_min").integer();
    inst.trains[train_of(e.at("train"))].route.push_back(entry);
  }

  if (root.has("weights"))
    for (const auto& [id, w] : root.at("weights").members())
      inst.trains[train_named(id, w)].weight = w.number();

  const auto dmax = root.at("d_max");
  if (dmax.raw().is_number_integer()) {
    inst.set_uniform_d_max(dmax.integer());
  } else {
    inst.d_max.assign(inst.trains.size(), -1);
    for (const auto& [id, v] : dmax.members())
      inst.d_max[train_named(id, v)] = v.integer();
    for (TrainIndex j = 0; j < inst.trains.size(); ++j)
      if (inst.d_max[j] < 0) dmax.fail("no d_max for train " + inst.trains[j].id);
  }

  if (root.has("turnover")) {
    for (const auto& t : root.at("turnover").items()) {
      Turnover tr;
      tr.from = train_of(t.at("from"));
      tr.to = train_of(t.at("to"));
      tr.min_turnover = t.at("min_turnover").integer();
      inst.turnovers.push_back(tr);
    }
  }

  if (root.has("penalties")) {
    const auto p = root.at("penalties");
    inst.penalties.p_sum = p.at("p_sum").number();
    inst.penalties.p_pair = p.at("p_pair").number();
  }

  inst.finalize();
  return inst;
}

RailwayInstance load_instance(const std::string& name_or_path) {
  for (const auto& [name, text] : detail::bundled_fixtures())
    if (name == name_or_path) return parse_instance(text, name);
  std::ifstream in(name_or_path);
  if (!in) throw Error("cannot open instance '" + name_or_path + "' (not a file or fixture name)");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str(), name_or_path);
}

std::string serialize_instance(const RailwayInstance& inst) {
  json doc;
  doc["schema_version"] = kInstanceSchemaVersion;
  doc["name"] = inst.name;
  if (!inst.description.empty()) doc["description"] = inst.description;
  doc["blocks"] = json::array();
  for (const auto& b : inst.blocks) {
    json jb{{"id", b.id}, {"kind", b.kind == BlockKind::Station ? "station" : "line"}};
    if (b.kind == BlockKind::Station) jb["capacity"] = b.capacity;
    if (!b.name.empty()) jb["name"] = b.name;
    doc["blocks"].push_back(jb);
  }
  doc["trains"] = json::array();
  doc["timetable"] = json::array();
  json weights = json::object(), dmax = json::object();
  for (TrainIndex j = 0; j < inst.trains.size(); ++j) {
    const auto& t = inst.trains[j];
    doc["trains"].push_back({{"id", t.id},
                             {"direction", t.direction == Direction::Dir0 ? 0 : 1},
                             {"initial_delay", t.initial_delay}});
    for (const auto& e : t.route)
      doc["timetable"].push_back({{"train", t.id},
                                  {"block", e.block},
                                  {"in", format_hhmm(e.t_in)},
                                  {"out", format_hhmm(e.t_out)},
                                  {"p_min", e.p_min}});
    weights[t.id] = t.weight;
    dmax[t.id] = inst.d_max[j];
  }
  doc["weights"] = weights;
  doc["d_max"] = dmax;
  doc["turnover"] = json::array();
  for (const auto& tr : inst.turnovers)
    doc["turnover"].push_back({{"from", inst.trains[tr.from].id},
                               {"to", inst.trains[tr.to].id},
                               {"min_turnover", tr.min_turnover}});
  doc["penalties"] = {{"p_sum", inst.penalties.p_sum}, {"p_pair", inst.penalties.p_pair}};
  return doc.dump(2) + "\n";
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& f : detail::bundled_fixtures()) out.push_back(f.first);
  return out;
}

const std::string& fixture_text(const std::string& name) {
  for (const auto& f : detail::bundled_fixtures())
    if (f.first == name) return f.second;
  throw Error("unknown fixture '" + name + "'");
}

// ------------------------------------------------------------------ reports

namespace {

json schedule_json(const RailwayInstance& instance, const Schedule& s) {
  const UnavoidableDelays du(instance);
  json rows = json::array();
  for (const auto& [key, d] : s.delays) {
    const auto [j, st] = key;
    const auto planned = instance.scheduled_departure(j, st);
    rows.push_back({{"train", instance.trains[j].id},
                    {"station", st},
                    {"delay", d},
                    {"unavoidable", du.at(j, st)},
                    {"secondary", d - du.at(j, st)},
                    {"scheduled", format_hhmm(planned)},
                    {"actual", format_hhmm(planned + d)}});
  }
  return rows;
}

}  // namespace

std::string report_json(const RailwayInstance& instance, const SolverReport& r) {
  json doc;
  doc["format"] = "railqubo-report";
  doc["version"] = kReportVersion;
  doc["instance"] = instance.name;
  doc["method"] = r.method;
  doc["params"] = json::object();
  for (const auto& [k, v] : r.params) doc["params"][k] = v;
  doc["feasible"] = r.feasible;
  if (r.energy) {
    doc["energy"] = {{"f", r.energy->objective},      {"f_hard", r.energy->hard},
                     {"p_pair_term", r.energy->pair}, {"p_sum_term", r.energy->sum},
                     {"total", r.energy->total()}};
  }
  if (r.config) {
    std::string bits;
    for (const auto b : *r.config) bits += b ? '1' : '0';
    doc["config"] = bits;
  }
  if (r.schedule) {
    doc["objective"] = r.objective;
    doc["max_secondary_delay"] = r.max_secondary;
    doc["delay_sum"] = r.delay_sum;
    doc["schedule"] = schedule_json(instance, *r.schedule);
    doc["signature"] = json::array();
    for (const auto& so : r.signature) {
      json ids = json::array();
      for (const auto j : so.trains) ids.push_back(instance.trains[j].id);
      doc["signature"].push_back({{"station", so.station}, {"trains", ids}});
    }
  }
  doc["violations"] = r.violations;
  if (r.spectrum) {
    doc["spectrum"] = json::array();
    for (const auto& l : r.spectrum->levels)
      doc["spectrum"].push_back({{"energy", l.energy},
                                 {"degeneracy", l.degeneracy},
                                 {"feasible_count", l.feasible_count}});
  }
  doc["notes"] = r.notes;
  return doc.dump(2) + "\n";
}

Schedule schedule_from_report(const RailwayInstance& instance, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("report: " + location(text, e.byte) + ": malformed document");
  }
  const std::string source = "report";
  const Field root(doc, "", source);
  if (root.at("format").str() != "railqubo-report") root.at("format").fail("not a solver report");
  if (root.at("version").integer() != kReportVersion) root.at("version").fail("unsupported version");
  Schedule s;
  for (const auto& row : root.at("schedule").items()) {
    const auto id = row.at("train");
    TrainIndex j = 0;
    try {
      j = instance.train_index(id.str());
    } catch (const Error&) {
      id.fail("unknown train '" + id.str() + "'");
    }
    s.set(j, row.at("station").integer(), row.at("delay").integer());
  }
  check_shape(instance, s);
  return s;
}

void write_schedule_csv(std::ostream& out, const RailwayInstance& instance, const Schedule& s) {
  const UnavoidableDelays du(instance);
  out << "train,station,delay,unavoidable,secondary,scheduled,actual\n";
  for (const auto& [key, d] : s.delays) {
    const auto [j, st] = key;
    const auto planned = instance.scheduled_departure(j, st);
    out << instance.trains[j].id << ',' << st << ',' << d << ',' << du.at(j, st) << ','
        << d - du.at(j, st) << ',' << format_hhmm(planned) << ',' << format_hhmm(planned + d) << '\n';
  }
}

void write_spectrum_csv(std::ostream& out, const Spectrum& sp) {
  out << "energy,degeneracy,feasible_count,infeasible_count\n";
  for (const auto& l : sp.levels)
    out << format_number(l.energy) << ',' << l.degeneracy << ',' << l.feasible_count << ','
        << l.degeneracy - l.feasible_count << '\n';
}

// ----------------------------------------------------------------- diagrams

DiagramData diagram_data(const RailwayInstance& instance, const Schedule& schedule) {
  DiagramData data;
  data.rows = occupations(instance, schedule);

  for (const auto& b : instance.blocks) {
    if (b.kind != BlockKind::Line) continue;
    std::vector<const Occupation*> here;
    for (const auto& o : data.rows)
      if (o.block == b.id) here.push_back(&o);
    for (std::size_t x = 0; x < here.size(); ++x)
      for (std::size_t y = x + 1; y < here.size(); ++y) {
        const auto from = std::max(here[x]->t_in, here[y]->t_in);
        const auto to = std::min(here[x]->t_out, here[y]->t_out);
        if (from < to)
          data.conflicts.push_back(
              {b.id, from, to, {std::min(here[x]->train, here[y]->train), std::max(here[x]->train, here[y]->train)}});
      }
  }
  for (const auto& v : check_capacity(instance, schedule)) {
    Minutes until = v.time;
    bool first = true;
    for (const auto& o : data.rows)
      if (o.block == v.station && std::count(v.trains.begin(), v.trains.end(), o.train)) {
        until = first ? o.t_out : std::min(until, o.t_out);
        first = false;
      }
    data.conflicts.push_back({v.station, v.time, std::max(until, v.time + 1), v.trains});
  }
  std::sort(data.conflicts.begin(), data.conflicts.end(),
            [](const ConflictMarker& l, const ConflictMarker& r) {
              return std::tie(l.from, l.block, l.trains) < std::tie(r.from, r.block, r.trains);
            });
  return data;
}

void write_diagram_csv(std::ostream& out, const RailwayInstance& instance, const DiagramData& data) {
  out << "kind,train,block,t_in,t_out,is_station\n";
  for (const auto& o : data.rows)
    out << "row," << instance.trains[o.train].id << ',' << o.block << ',' << o.t_in << ',' << o.t_out
        << ',' << (o.is_station ? 1 : 0) << '\n';
  for (const auto& c : data.conflicts) {
    out << "conflict,";
    for (std::size_t k = 0; k < c.trains.size(); ++k)
      out << (k ? "+" : "") << instance.trains[c.trains[k]].id;
    out << ',' << c.block << ',' << c.from << ',' << c.to << ",\n";
  }
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* const kPalette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b",
                                "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

}  // namespace

void write_diagram_svg(std::ostream& out, const RailwayInstance& instance, const DiagramData& data,
                       const std::string& title) {
  if (data.rows.empty()) throw Error("diagram has no rows");
  Minutes t0 = data.rows.front().t_in, t1 = data.rows.front().t_out;
  for (const auto& o : data.rows) {
    t0 = std::min(t0, o.t_in);
    t1 = std::max(t1, o.t_out);
  }
  t0 -= 2;
  t1 += 2;
  const double left = 110, top = 40, px_per_min = 12, band = 36;
  const double width = left + (t1 - t0) * px_per_min + 30;
  const double height = top + band * static_cast<double>(instance.blocks.size()) + 40;
  const auto x_of = [&](Minutes t) { return left + (t - t0) * px_per_min; };
  const auto y_of = [&](double pos) { return top + pos * band; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<!-- railqubo-diagram 1 -->\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << xml_escape(title) << "</text>\n";

  for (std::size_t p = 0; p < instance.blocks.size(); ++p) {
    const auto& b = instance.blocks[p];
    if (b.kind == BlockKind::Station)
      out << "<rect x=\"" << left << "\" y=\"" << y_of(p) << "\" width=\"" << width - left - 30
          << "\" height=\"" << band << "\" fill=\"#f2f2f2\"/>\n";
    std::string label = std::to_string(b.id);
    if (!b.name.empty()) label += " " + b.name;
    out << "<text x=\"6\" y=\"" << y_of(p + 0.5) + 4 << "\">" << xml_escape(label) << "</text>\n";
  }
  for (Minutes t = t0 + (10 - ((t0 % 10) + 10) % 10) % 10; t <= t1; t += 10) {
    out << "<line x1=\"" << x_of(t) << "\" y1=\"" << top << "\" x2=\"" << x_of(t) << "\" y2=\""
        << y_of(static_cast<double>(instance.blocks.size())) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << x_of(t) - 14 << "\" y=\"" << height - 14 << "\">" << format_hhmm(t)
        << "</text>\n";
  }

  for (const auto& c : data.conflicts) {
    const auto p = static_cast<double>(*instance.line_position(c.block));
    out << "<rect class=\"conflict\" x=\"" << x_of(c.from) << "\" y=\"" << y_of(p) << "\" width=\""
        << (c.to - c.from) * px_per_min << "\" height=\"" << band
        << "\" fill=\"#d62728\" fill-opacity=\"0.35\"/>\n";
  }

  for (TrainIndex j = 0; j < instance.trains.size(); ++j) {
    const bool forward = instance.trains[j].direction == Direction::Dir0;
    std::ostringstream pts;
    for (const auto& o : data.rows) {
      if (o.train != j) continue;
      const auto p = static_cast<double>(*instance.line_position(o.block));
      // enter at one edge of the block band, leave at the other
      pts << x_of(o.t_in) << ',' << y_of(forward ? p : p + 1) << ' ' << x_of(o.t_out) << ','
          << y_of(forward ? p + 1 : p) << ' ';
    }
    const char* colour = kPalette[j % (sizeof kPalette / sizeof *kPalette)];
    out << "<polyline class=\"train\" fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    const auto& first = instance.trains[j].route.front();
    const auto start = std::find_if(data.rows.begin(), data.rows.end(),
                                    [&](const Occupation& o) { return o.train == j; });
    const auto p0 = static_cast<double>(*instance.line_position(first.block));
    out << "<text x=\"" << x_of(start->t_in) + 2 << "\" y=\"" << y_of(forward ? p0 : p0 + 1) - 3
        << "\" fill=\"" << colour << "\">" << xml_escape(instance.trains[j].id) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace railqubo
