#pragma once

#include <string>

#include "railqubo/io.hpp"

// Two stations joined by one line block, a single train and no conflicts.
inline railqubo::RailwayInstance lone_train(int d_max = 2) {
  return railqubo::parse_instance(R"({
    "schema_version": 1, "name": "lone",
    "blocks": [{"id": 1, "kind": "station", "capacity": 1},
               {"id": 2, "kind": "line"},
               {"id": 3, "kind": "station", "capacity": 1}],
    "trains": [{"id": "A", "direction": 0, "initial_delay": 3}],
    "timetable": [{"train": "A", "block": 1, "in": "09:00", "out": "09:02", "p_min": 1},
                  {"train": "A", "block": 2, "in": "09:02", "out": "09:10", "p_min": 7},
                  {"train": "A", "block": 3, "in": "09:10", "out": "09:11", "p_min": 1}],
    "weights": {"A": 1.0},
    "d_max": )" + std::to_string(d_max) + R"(,
    "turnover": [],
    "penalties": {"p_sum": 1.75, "p_pair": 1.75}
  })", "lone");
}
