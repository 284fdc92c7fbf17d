#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "m1path/cadlag.hpp"
#include "m1path/param_rep.hpp"
#include "m1path/queue_sim.hpp"

namespace m1path {

using Json = nlohmann::json;

// Path files: {"T": 2, "kind": "step", "initial": 0, "nodes": [[1, 1]]}.
// For step paths `nodes` lists the value changes; for "pl" paths it lists the
// nodes after (0, initial), a repeated time marking a jump.
Json path_to_json(const CadlagPath& x);
CadlagPath path_from_json_text(std::string_view text, std::string_view source = "<input>");
CadlagPath load_path(const std::string& file);
void save_path(const CadlagPath& x, const std::string& file);

// {"knots": [[s, u, r], ...], "flat_spots": [[t, s1, s2], ...]}
Json rep_to_json(const ParametricRep& rep);
ParametricRep rep_from_json(const Json& j);

Json params_to_json(const QueueParams& p);
Json trace_to_json(const QueueTrace& tr);

FcltConfig fclt_config_from_json_text(std::string_view text, std::string_view source = "<input>");
FcltConfig load_fclt_config(const std::string& file);

std::string read_text_file(const std::string& file);
void write_text_file(const std::string& file, std::string_view text);

}  // namespace m1path
