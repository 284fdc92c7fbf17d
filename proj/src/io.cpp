#include "m1path/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "m1path/error.hpp"

namespace m1path {

namespace {

std::size_t line_of(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Byte offset of element k of the top-level "nodes" array, or npos.
std::size_t node_offset(std::string_view text, std::size_t k) {
  std::size_t pos = text.find("\"nodes\"");
  if (pos == std::string_view::npos) return pos;
  pos = text.find('[', pos);
  if (pos == std::string_view::npos) return pos;
  int depth = 0;
  std::size_t index = 0;
  bool expect = true;
  for (std::size_t i = pos; i < text.size(); ++i) {
    char ch = text[i];
    if (ch == '[' || ch == '{') {
      if (depth == 1 && expect) {
        if (index == k) return i;
        expect = false;
      }
      ++depth;
    } else if (ch == ']' || ch == '}') {
      if (--depth == 0) break;
    } else if (depth == 1 && ch == ',') {
      ++index;
      expect = true;
    } else if (depth == 1 && expect && !std::isspace(static_cast<unsigned char>(ch))) {
      if (index == k) return i;
      expect = false;
    }
  }
  return std::string_view::npos;
}

[[noreturn]] void fail_at(std::string_view source, std::string_view text, std::size_t offset,
                          const std::string& msg) {
  std::string where(source);
  if (offset != std::string_view::npos) where += ":" + std::to_string(line_of(text, offset));
  throw ParseError(where + ": " + msg);
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail_at(source, text, e.byte == 0 ? 0 : e.byte - 1, std::string("malformed JSON: ") + e.what());
  }
}

double number_field(const Json& obj, const char* key, std::string_view source, std::string_view text) {
  auto it = obj.find(key);
  if (it == obj.end()) fail_at(source, text, 0, std::string("missing field \"") + key + "\"");
  if (!it->is_number()) fail_at(source, text, 0, std::string("field \"") + key + "\" must be a number");
  double v = it->get<double>();
  if (!std::isfinite(v)) fail_at(source, text, 0, std::string("field \"") + key + "\" must be finite");
  return v;
}

}  // namespace

Json path_to_json(const CadlagPath& x) {
  Json j;
  j["T"] = x.horizon();
  Json nodes = Json::array();
  if (x.kind() == PathKind::step) {
    j["kind"] = "step";
    j["initial"] = x.value_at(0.0);
    for (const Node& c : x.step_changes()) nodes.push_back({c.t, c.v});
  } else {
    j["kind"] = "pl";
    auto all = x.nodes();
    j["initial"] = all.front().v;
    for (std::size_t i = 1; i < all.size(); ++i) nodes.push_back({all[i].t, all[i].v});
  }
  j["nodes"] = std::move(nodes);
  return j;
}

CadlagPath path_from_json_text(std::string_view text, std::string_view source) {
  const Json j = parse_json(text, source);
  if (!j.is_object()) fail_at(source, text, 0, "path file must hold a JSON object");
  const double horizon = number_field(j, "T", source, text);
  if (!(horizon > 0.0)) fail_at(source, text, 0, "T must be > 0");
  const double initial = number_field(j, "initial", source, text);
  auto kind_it = j.find("kind");
  if (kind_it == j.end() || !kind_it->is_string()) fail_at(source, text, 0, "field \"kind\" must be \"step\" or \"pl\"");
  const std::string kind = kind_it->get<std::string>();
  const bool step = kind == "step";
  if (!step && kind != "pl") fail_at(source, text, 0, "unknown path kind \"" + kind + "\"");
  auto nodes_it = j.find("nodes");
  if (nodes_it == j.end() || !nodes_it->is_array()) fail_at(source, text, 0, "field \"nodes\" must be an array");

  std::vector<Node> nodes;
  const Json& arr = *nodes_it;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    auto fail = [&](const std::string& msg) {
      fail_at(source, text, node_offset(text, k), "nodes[" + std::to_string(k) + "]: " + msg);
    };
    const Json& e = arr[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      fail("expected [t, value] with two numbers");
    }
    Node n{e[0].get<double>(), e[1].get<double>()};
    if (!std::isfinite(n.t) || !std::isfinite(n.v)) fail("non-finite entry");
    if (!(n.t > 0.0)) fail("time must be > 0");
    if (n.t > horizon) fail("time exceeds T");
    if (!nodes.empty()) {
      const double prev = nodes.back().t;
      if (step && !(n.t > prev)) fail("times must be strictly increasing");
      if (!step && n.t < prev) fail("times must be nondecreasing");
      if (!step && nodes.size() >= 2 && nodes[nodes.size() - 2].t == n.t && prev == n.t) {
        fail("more than two nodes share one time");
      }
    }
    nodes.push_back(n);
  }
  try {
    if (step) return CadlagPath::step(horizon, initial, std::move(nodes));
    nodes.insert(nodes.begin(), Node{0.0, initial});
    return CadlagPath::piecewise_linear(horizon, std::move(nodes));
  } catch (const DomainError& e) {
    fail_at(source, text, 0, e.what());
  }
}

CadlagPath load_path(const std::string& file) { return path_from_json_text(read_text_file(file), file); }

void save_path(const CadlagPath& x, const std::string& file) {
  write_text_file(file, path_to_json(x).dump(2) + "\n");
}

Json rep_to_json(const ParametricRep& rep) {
  Json knots = Json::array();
  for (const RepKnot& k : rep.knots()) knots.push_back({k.s, k.u, k.r});
  Json flats = Json::array();
  for (const FlatSpot& f : rep.flat_spots()) flats.push_back({f.t, f.s1, f.s2, f.length});
  return Json{{"knots", std::move(knots)}, {"flat_spots", std::move(flats)}};
}

ParametricRep rep_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("knots") || !j["knots"].is_array()) {
    throw ParseError("rep JSON needs a \"knots\" array");
  }
  std::vector<RepKnot> knots;
  for (const Json& e : j["knots"]) {
    if (!e.is_array() || e.size() != 3) throw ParseError("rep knots must be [s, u, r]");
    knots.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
  }
  std::vector<FlatSpot> flats;
  if (j.contains("flat_spots")) {
    for (const Json& e : j["flat_spots"]) {
      if (!e.is_array() || (e.size() != 3 && e.size() != 4)) throw ParseError("flat spots must be [t, s1, s2(, length)]");
      double s1 = e[1].get<double>();
      double s2 = e[2].get<double>();
      flats.push_back({e[0].get<double>(), s1, s2, e.size() == 4 ? e[3].get<double>() : s2 - s1});
    }
  }
  try {
    return ParametricRep(std::move(knots), std::move(flats));
  } catch (const DomainError& e) {
    throw ParseError(std::string("rep JSON: ") + e.what());
  }
}

Json params_to_json(const QueueParams& p) {
  return Json{{"n", p.n},
              {"mu", p.mu},
              {"theta", p.theta},
              {"beta", p.beta},
              {"alpha", p.alpha},
              {"T", p.horizon},
              {"q0", p.q0},
              {"seed", p.seed},
              {"interarrival", to_string(p.interarrival)},
              {"pareto_shift", p.pareto_shift},
              {"c_n", p.c_n},
              {"rho", p.rho},
              {"lambda", p.lambda}};
}

Json trace_to_json(const QueueTrace& tr) {
  return Json{{"params", params_to_json(tr.params)},
              {"counts",
               {{"q0", tr.params.q0},
                {"arrivals", tr.arrivals},
                {"departures", tr.departures},
                {"abandonments", tr.abandonments},
                {"q_final", tr.q_final}}},
              {"queue", path_to_json(tr.queue)},
              {"arrival_count", path_to_json(tr.arrival_count)}};
}

FcltConfig fclt_config_from_json_text(std::string_view text, std::string_view source) {
  const Json j = parse_json(text, source);
  if (!j.is_object()) fail_at(source, text, 0, "config must be a JSON object");
  static const std::set<std::string> known{"ns", "mu", "theta", "beta", "alpha", "T", "reps", "seed",
                                           "interarrival", "pareto_shift", "limit_grid", "limit_step", "limit_scale", "limit_skew",
                                           "bootstrap", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) fail_at(source, text, text.find("\"" + key + "\""), "unknown config key \"" + key + "\"");
  }
  FcltConfig cfg;
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = number_field(j, key, source, text);
  };
  auto count = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    const Json& v = j[key];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail_at(source, text, text.find(std::string("\"") + key + "\""),
              std::string("\"") + key + "\" must be a non-negative integer");
    }
    out = static_cast<std::remove_reference_t<decltype(out)>>(v.get<unsigned long long>());
  };
  num("mu", cfg.mu);
  num("theta", cfg.theta);
  num("beta", cfg.beta);
  num("alpha", cfg.alpha);
  num("T", cfg.horizon);
  num("pareto_shift", cfg.pareto_shift);
  num("limit_grid", cfg.limit_grid);
  num("limit_step", cfg.limit_step);
  num("limit_scale", cfg.limit_scale);
  num("limit_skew", cfg.limit_skew);
  count("reps", cfg.reps);
  count("seed", cfg.seed);
  count("bootstrap", cfg.bootstrap);
  count("threads", cfg.threads);
  if (j.contains("interarrival")) {
    if (!j["interarrival"].is_string()) fail_at(source, text, 0, "\"interarrival\" must be a string");
    cfg.interarrival = parse_interarrival(j["interarrival"].get<std::string>());
  }
  if (j.contains("ns")) {
    const Json& ns = j["ns"];
    if (!ns.is_array() || ns.empty()) fail_at(source, text, text.find("\"ns\""), "\"ns\" must be a non-empty array");
    cfg.ns.clear();
    for (const Json& v : ns) {
      if (!v.is_number_integer() || v.get<long long>() < 1) {
        fail_at(source, text, text.find("\"ns\""), "\"ns\" entries must be integers >= 1");
      }
      cfg.ns.push_back(v.get<std::int64_t>());
    }
  }
  return cfg;
}

FcltConfig load_fclt_config(const std::string& file) {
  return fclt_config_from_json_text(read_text_file(file), file);
}

std::string read_text_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot read '" + file + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& file, std::string_view text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write '" + file + "'");
  out << text;
  if (!out) throw Error("failed writing '" + file + "'");
}

}  // namespace m1path
