#include "botlab/io.hpp"

#include "botlab/error.hpp"
#include "botlab/experiment.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace botlab {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string(what) + ": " + e.what());
    }
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object()) throw Error(Errc::InvalidArgument, std::string(what) + ": expected a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw Error(Errc::InvalidArgument, std::string(what) + ": unknown key '" + k + "'");
}

template <class T>
T get_as(const json& j, const char* what) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string(what) + ": " + e.what());
    }
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::InvalidArgument, "cannot write " + path);
    out << text;
}

TransitionChain parse_chain_json(const std::string& text) {
    const json j = parse_json(text, "chain");
    only_keys(j, {"matrix", "bsc"}, "chain");
    if (j.contains("bsc")) {
        if (j.contains("matrix")) throw Error(Errc::InvalidArgument, "chain: give either matrix or bsc");
        return bsc(get_as<double>(j["bsc"], "chain.bsc"));
    }
    if (!j.contains("matrix")) throw Error(Errc::InvalidArgument, "chain: missing matrix");
    return validate_chain(get_as<std::vector<std::vector<double>>>(j["matrix"], "chain.matrix"));
}

TransitionChain load_chain(const std::string& path) { return parse_chain_json(read_text_file(path)); }

RootedTree parse_tree_json(const std::string& text) {
    const json j = parse_json(text, "tree");
    only_keys(j, {"dary", "parents", "n", "root", "edges"}, "tree");
    if (j.contains("dary")) {
        const json& s = j["dary"];
        only_keys(s, {"d", "depth"}, "tree.dary");
        return build_dary(get_as<int>(s.at("d"), "tree.dary.d"), get_as<int>(s.at("depth"), "tree.dary.depth"));
    }
    if (j.contains("parents")) return tree_from_parents(get_as<std::vector<int>>(j["parents"], "tree.parents"));
    if (j.contains("edges")) {
        const auto e = get_as<std::vector<std::pair<int, int>>>(j["edges"], "tree.edges");
        const int n = j.contains("n") ? get_as<int>(j["n"], "tree.n") : static_cast<int>(e.size()) + 1;
        const int root = j.contains("root") ? get_as<int>(j["root"], "tree.root") : 0;
        return tree_from_edges(n, e, root);
    }
    throw Error(Errc::InvalidTree, "tree: need dary, parents or edges");
}

RootedTree load_tree(const std::string& path) { return parse_tree_json(read_text_file(path)); }

EsPolynomial parse_polynomial_json(const std::string& text) {
    const json j = parse_json(text, "polynomial");
    only_keys(j, {"q", "terms"}, "polynomial");
    EsPolynomial f;
    f.q = j.contains("q") ? get_as<int>(j["q"], "polynomial.q") : 2;
    if (j.contains("terms")) {
        for (const auto& t : j["terms"]) {
            only_keys(t, {"support", "table"}, "polynomial term");
            LocalFunction phi;
            phi.support = get_as<std::vector<int>>(t.at("support"), "term.support");
            phi.table = get_as<std::vector<double>>(t.at("table"), "term.table");
            validate_local(phi, f.q);
            f.terms.push_back(std::move(phi));
        }
    }
    return f;
}

EsPolynomial load_polynomial(const std::string& path) { return parse_polynomial_json(read_text_file(path)); }

Labeling parse_observation_json(const std::string& text, int n) {
    const json j = parse_json(text, "observation");
    only_keys(j, {"leaves"}, "observation");
    Labeling x(n);
    for (const auto& [v, s] : get_as<std::vector<std::pair<int, int>>>(j.at("leaves"), "observation.leaves")) {
        if (v < 0 || v >= n || s < 0) throw Error(Errc::InvalidArgument, "observation entry out of range");
        x.state[v] = s;
    }
    return x;
}

Labeling load_observation(const std::string& path, int n) { return parse_observation_json(read_text_file(path), n); }

std::string samples_to_csv(const std::vector<Labeling>& samples) {
    std::ostringstream out;
    out << "sample";
    const std::size_t n = samples.empty() ? 0 : samples.front().state.size();
    for (std::size_t v = 0; v < n; ++v) out << ",v" << v;
    out << "\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out << i;
        for (int s : samples[i].state) out << ',' << s;
        out << "\n";
    }
    return out.str();
}

void dump_operator(const LinearMapMatrix& op, const std::string& csv_path, const std::string& sidecar_path) {
    std::ostringstream csv;
    for (Eigen::Index i = 0; i < op.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < op.entries.cols(); ++j) {
            if (j) csv << ',';
            csv << format_real(op.entries(i, j));
        }
        csv << "\n";
    }
    write_text_file(csv_path, csv.str());
    const json side{{"q", op.q},
                    {"input_domain", op.input_domain},
                    {"output_domain", op.output_domain},
                    {"rows", op.entries.rows()},
                    {"cols", op.entries.cols()},
                    {"layout", "row-major states, last domain variable fastest"}};
    write_text_file(sidecar_path, side.dump(2) + "\n");
}

}  // namespace botlab
