#pragma once

#include "botlab/broadcast.hpp"
#include "botlab/operators.hpp"

#include <string>
#include <vector>

namespace botlab {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// {"matrix": [[...], ...]} or {"bsc": delta}
TransitionChain parse_chain_json(const std::string& text);
TransitionChain load_chain(const std::string& path);

// {"dary": {"d": 2, "depth": 3}}, {"parents": [-1, 0, 0, ...]}
// or {"n": 4, "root": 0, "edges": [[0, 1], ...]}
RootedTree parse_tree_json(const std::string& text);
RootedTree load_tree(const std::string& path);

// {"q": 2, "terms": [{"support": [3, 4], "table": [...]}, ...]}
EsPolynomial parse_polynomial_json(const std::string& text);
EsPolynomial load_polynomial(const std::string& path);

// {"leaves": [[vertex, state], ...]} against a tree with n vertices.
Labeling parse_observation_json(const std::string& text, int n);
Labeling load_observation(const std::string& path, int n);

// One row per labeling: sample index then the state of every vertex.
std::string samples_to_csv(const std::vector<Labeling>& samples);

// Operator entries as CSV (one row per output state) plus a JSON sidecar with
// the domains, q and shape.
void dump_operator(const LinearMapMatrix& op, const std::string& csv_path, const std::string& sidecar_path);

}  // namespace botlab
