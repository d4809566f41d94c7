#pragma once

#include <fstream>
#include <json.hpp>

#include "groupshift/chart.hpp"
#include "groupshift/reduction.hpp"

namespace groupshift {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

inline Group parse_group(const Json& doc);

inline OracleSpec parse_oracle(const Json& doc, const Json& parent) {
    std::string kind = doc.value("kind", "");
    if (kind == "free-abelian") return FreeAbelianOracle{doc.at("rank").get<int>()};
    if (kind == "finite-cyclic") return FiniteCyclicOracle{doc.at("modulus").get<long long>()};
    if (kind == "semidirect") {
        SemidirectOracle o;
        o.rank = doc.at("rank").get<int>();
        o.matrix = doc.at("matrix").get<std::vector<std::vector<long long>>>();
        return o;
    }
    if (kind == "lamplighter") return LamplighterOracle{};
    if (kind == "direct-product") {
        const Json& factors = doc.at("factors");
        if (!factors.is_array() || factors.size() != 2) {
            throw spec_error("direct-product oracle needs exactly two factors");
        }
        return DirectProductOracle{std::make_shared<Group>(parse_group(factors[0])),
                                   std::make_shared<Group>(parse_group(factors[1]))};
    }
    if (kind == "subprocess") {
        auto cmd = doc.at("command").get<std::vector<std::string>>();
        auto client = std::make_shared<SubprocessWordProblem>(cmd);
        return SubprocessOracle{std::move(cmd), std::move(client)};
    }
    (void)parent;
    throw spec_error("unknown oracle kind: \"" + kind + "\"");
}

inline Group parse_group(const Json& doc) {
    const Json& oracle = doc.at("oracle");
    std::string kind = oracle.value("kind", "");
    std::string name = doc.value("name", "");
    std::vector<std::string> gens;
    if (doc.contains("generators")) gens = doc["generators"].get<std::vector<std::string>>();

    // built-ins derive generator layout from the oracle; explicit names, when
    // given, rename positionally
    Group built = [&]() -> Group {
        if (kind == "free-abelian") return groups::free_abelian(oracle.at("rank").get<int>(), name);
        if (kind == "finite-cyclic") {
            return groups::finite_cyclic(oracle.at("modulus").get<long long>(), name);
        }
        if (kind == "semidirect") {
            return groups::semidirect_zd_z(
                oracle.at("matrix").get<std::vector<std::vector<long long>>>(), name);
        }
        if (kind == "lamplighter") return groups::lamplighter(name);
        if (kind == "direct-product") {
            const Json& factors = oracle.at("factors");
            return groups::direct_product(parse_group(factors.at(0)), parse_group(factors.at(1)),
                                          name);
        }
        if (kind == "subprocess") {
            if (gens.empty()) throw spec_error("subprocess groups must list their generators");
            return groups::subprocess(oracle.at("command").get<std::vector<std::string>>(), gens,
                                      name);
        }
        throw spec_error("unknown oracle kind: \"" + kind + "\"");
    }();

    GroupSpec spec = built.spec();
    if (!gens.empty() && kind != "subprocess") {
        if (gens.size() != spec.generators.size()) {
            throw spec_error("generator list does not match the oracle layout (" +
                             std::to_string(spec.generators.size()) + " expected)");
        }
        spec.generators = gens;
    }
    if (doc.contains("relators")) spec.relators = doc["relators"].get<std::vector<std::string>>();
    return Group(std::move(spec));
}

inline Pattern parse_pattern(const Group& g, const Alphabet& alphabet, const Json& doc) {
    auto words = doc.at("support").get<std::vector<std::string>>();
    auto values = doc.at("values").get<std::vector<std::string>>();
    if (words.size() != values.size()) {
        throw spec_error("pattern support/values arrays must be parallel");
    }
    std::vector<Element> cells;
    cells.reserve(words.size());
    for (const auto& w : words) cells.push_back(g.element(w));
    Support supp(cells);
    if (supp.size() != words.size()) throw spec_error("pattern support has duplicate cells");
    std::vector<Symbol> syms(supp.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        syms[*supp.find(cells[i])] = alphabet.index_of(values[i]);
    }
    return Pattern(std::move(supp), std::move(syms));
}

inline PatternCoding parse_coding(const Alphabet& alphabet, const Json& doc) {
    PatternCoding c;
    for (const Json& entry : doc.at("entries")) {
        c.entries.emplace_back(entry.at("word").get<std::string>(),
                               alphabet.index_of(entry.at("value").get<std::string>()));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Workspace: a named registry of documents with cross-reference resolution
// ---------------------------------------------------------------------------

class Workspace {
public:
    void add_document(const std::string& name, Json doc) { docs_[name] = std::move(doc); }

    /// Loads a document and returns the name it registered under (the "name"
    /// field when present, the file stem otherwise).
    std::string load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw spec_error("cannot open file: " + path);
        Json doc = Json::parse(in, nullptr, true, true);
        std::string name = doc.value("name", "");
        if (name.empty()) {
            // fall back to the file stem
            auto slash = path.find_last_of('/');
            std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
            auto dot = stem.find_last_of('.');
            if (dot != std::string::npos) stem = stem.substr(0, dot);
            name = stem;
        }
        docs_[name] = std::move(doc);
        return name;
    }

    const Json& document(const std::string& name) const {
        auto it = docs_.find(name);
        if (it == docs_.end()) throw spec_error("unresolved reference: \"" + name + "\"");
        return it->second;
    }

    Json resolve(const Json& ref) const {
        if (ref.is_string()) return document(ref.get<std::string>());
        return ref;
    }

    Group group(const Json& ref) const { return parse_group(resolve(ref)); }

    SftSpec sft(const Json& ref) const {
        Json doc = resolve(ref);
        if (doc.contains("construct")) return construct_sft(doc["construct"]);
        Group g = group(doc.at("group"));
        Alphabet alphabet(doc.at("alphabet").get<std::vector<std::string>>());
        SftSpec out(g, alphabet);
        if (doc.contains("forbidden")) {
            for (const Json& p : doc["forbidden"]) out.add_forbidden(parse_pattern(g, alphabet, p));
        }
        return out;
    }

    Support support(const Json& ref) const {
        Json doc = resolve(ref);
        Group g = group(doc.at("group"));
        std::vector<Element> cells;
        for (const auto& w : doc.at("cells").get<std::vector<std::string>>()) {
            cells.push_back(g.element(w));
        }
        return Support(std::move(cells));
    }

    std::pair<TileSet, Group> tileset(const Json& ref) const {
        Json doc = resolve(ref);
        Group g = group(doc.at("group"));
        std::vector<Support> tiles;
        for (const Json& tile : doc.at("tiles")) {
            std::vector<Element> cells;
            for (const auto& w : tile.get<std::vector<std::string>>()) cells.push_back(g.element(w));
            tiles.emplace_back(std::move(cells));
        }
        return {TileSet(std::move(tiles)), std::move(g)};
    }

    Chart chart(const Json& ref) const {
        Json doc = resolve(ref);
        SftSpec x = sft(doc.at("sft"));
        Cocycle c;
        c.h_generators = doc.at("h_generators").get<std::vector<std::string>>();
        if (doc.contains("h_inverses")) {
            c.h_inverse = doc["h_inverses"].get<std::vector<int>>();
            if (c.h_inverse.size() != c.h_generators.size()) {
                throw spec_error("h_inverses must parallel h_generators");
            }
        } else {
            // pair x with x^-1 by name; unpaired generators are involutions
            c.h_inverse.assign(c.h_generators.size(), -1);
            for (std::size_t i = 0; i < c.h_generators.size(); ++i) {
                const std::string& gname = c.h_generators[i];
                std::string partner = gname.size() > 3 && gname.substr(gname.size() - 3) == "^-1"
                                          ? gname.substr(0, gname.size() - 3)
                                          : gname + "^-1";
                auto it = std::find(c.h_generators.begin(), c.h_generators.end(), partner);
                c.h_inverse[i] = it == c.h_generators.end()
                                     ? static_cast<int>(i)
                                     : static_cast<int>(it - c.h_generators.begin());
            }
        }
        std::vector<Element> wcells;
        for (const auto& w : doc.at("window").get<std::vector<std::string>>()) {
            wcells.push_back(x.group.element(w));
        }
        c.window = Support(std::move(wcells));
        c.table.resize(c.h_generators.size());
        for (const Json& row : doc.at("table")) {
            int gen = c.h_generator_index(row.at("gen").get<std::string>());
            Pattern p = parse_pattern(x.group, x.alphabet, row.at("pattern"));
            if (!(p.support == c.window)) {
                throw spec_error("cocycle table pattern support must equal the window");
            }
            c.set_entry(gen, p.symbols, x.group.element(row.at("value").get<std::string>()));
        }
        return Chart{std::move(x), std::move(c)};
    }

    ExactTiling exact_tiling(const Json& ref) const {
        Json doc = resolve(ref);
        auto [ts, g] = tileset(doc.at("tileset"));
        auto periods = doc.at("periods").get<std::vector<int>>();
        std::vector<int> assignment;
        Alphabet names = tiling_alphabet(ts);
        for (const Json& v : doc.at("assignment")) {
            if (v.is_number_integer()) {
                assignment.push_back(v.get<int>());
            } else {
                std::string s = v.get<std::string>();
                assignment.push_back(s == "empty" ? -1 : static_cast<int>(names.index_of(s)));
            }
        }
        return ExactTiling(std::move(ts), std::move(g), std::move(periods), std::move(assignment));
    }

    std::vector<Pattern> pattern_list(const Json& ref, const Group& g, const Alphabet& a) const {
        Json doc = resolve(ref);
        std::vector<Pattern> out;
        for (const Json& p : doc.at("patterns")) out.push_back(parse_pattern(g, a, p));
        return out;
    }

    const std::map<std::string, Json>& documents() const { return docs_; }

private:
    /// Re-runs a constructor recipe; this is how rule-backed specs round-trip
    /// through JSON without materializing their pattern families.
    SftSpec construct_sft(const Json& recipe) const {
        std::string kind = recipe.at("kind").get<std::string>();
        if (kind == "tiling") {
            auto [ts, g] = tileset(recipe.at("tiles"));
            return tiling_sft(g, ts);
        }
        if (kind == "overlay") {
            SftSpec x = sft(recipe.at("sft"));
            auto [ts, g] = tileset(recipe.at("tiles"));
            SftSpec constraints = sft(recipe.at("tiling"));
            Support k = support(recipe.at("K"));
            return overlay_sft(x, ts, constraints, k).sft;
        }
        if (kind == "language") {
            SftSpec x = sft(recipe.at("sft"));
            Support d = support(recipe.at("window"));
            auto sample = pattern_list(recipe.at("sample"), x.group, x.alphabet);
            return entropy_reducing_sft(x, d, sample, recipe.value("as_rule", false));
        }
        throw spec_error("unknown construct kind: \"" + kind + "\"");
    }

    std::map<std::string, Json> docs_;
};

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline Json emit_group(const Group& g) {
    Json doc;
    doc["name"] = g.name();
    doc["generators"] = g.spec().generators;
    Json oracle;
    std::visit(
        [&](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, FreeAbelianOracle>) {
                oracle["kind"] = "free-abelian";
                oracle["rank"] = o.rank;
            } else if constexpr (std::is_same_v<T, FiniteCyclicOracle>) {
                oracle["kind"] = "finite-cyclic";
                oracle["modulus"] = o.modulus;
            } else if constexpr (std::is_same_v<T, SemidirectOracle>) {
                oracle["kind"] = "semidirect";
                oracle["rank"] = o.rank;
                oracle["matrix"] = o.matrix;
            } else if constexpr (std::is_same_v<T, LamplighterOracle>) {
                oracle["kind"] = "lamplighter";
            } else if constexpr (std::is_same_v<T, DirectProductOracle>) {
                oracle["kind"] = "direct-product";
                oracle["factors"] = Json::array({emit_group(*o.left), emit_group(*o.right)});
            } else if constexpr (std::is_same_v<T, SubprocessOracle>) {
                oracle["kind"] = "subprocess";
                oracle["command"] = o.command;
            }
        },
        g.spec().oracle);
    doc["oracle"] = std::move(oracle);
    if (!g.spec().relators.empty()) doc["relators"] = g.spec().relators;
    return doc;
}

inline Json emit_pattern(const Group& g, const Alphabet& a, const Pattern& p) {
    Json doc;
    Json support = Json::array();
    Json values = Json::array();
    for (std::size_t i = 0; i < p.support.size(); ++i) {
        support.push_back(g.to_string(p.support.cell(i)));
        values.push_back(a.name(p.symbols[i]));
    }
    doc["support"] = std::move(support);
    doc["values"] = std::move(values);
    return doc;
}

inline Json emit_sft(const SftSpec& x) {
    if (!x.rules.empty()) {
        throw spec_error("rule-backed SFTs serialize through their constructor recipe");
    }
    Json doc;
    doc["group"] = emit_group(x.group);
    doc["alphabet"] = x.alphabet.symbols;
    Json forbidden = Json::array();
    for (const Pattern& p : x.forbidden) forbidden.push_back(emit_pattern(x.group, x.alphabet, p));
    doc["forbidden"] = std::move(forbidden);
    return doc;
}

inline Json emit_support(const Group& g, const Support& s) {
    Json doc;
    doc["group"] = emit_group(g);
    Json cells = Json::array();
    for (const Element& e : s.cells()) cells.push_back(g.to_string(e));
    doc["cells"] = std::move(cells);
    return doc;
}

inline Json emit_tileset(const Group& g, const TileSet& ts) {
    Json doc;
    doc["group"] = emit_group(g);
    Json tiles = Json::array();
    for (const Support& t : ts.tiles) {
        Json tile = Json::array();
        for (const Element& e : t.cells()) tile.push_back(g.to_string(e));
        tiles.push_back(std::move(tile));
    }
    doc["tiles"] = std::move(tiles);
    return doc;
}

inline Json emit_chart(const Chart& ch) {
    Json doc;
    doc["sft"] = emit_sft(ch.sft);
    doc["h_generators"] = ch.cocycle.h_generators;
    doc["h_inverses"] = ch.cocycle.h_inverse;
    Json window = Json::array();
    for (const Element& e : ch.cocycle.window.cells()) window.push_back(ch.sft.group.to_string(e));
    doc["window"] = std::move(window);
    Json table = Json::array();
    for (std::size_t gen = 0; gen < ch.cocycle.table.size(); ++gen) {
        for (const auto& [key, value] : ch.cocycle.table[gen]) {
            Json row;
            row["gen"] = ch.cocycle.h_generators[gen];
            row["pattern"] = emit_pattern(ch.sft.group, ch.sft.alphabet,
                                          Pattern(ch.cocycle.window, key));
            row["value"] = ch.sft.group.to_string(value);
            table.push_back(std::move(row));
        }
    }
    doc["table"] = std::move(table);
    return doc;
}

inline void write_json_file(const std::string& path, const Json& doc) {
    std::ofstream out(path);
    if (!out) throw spec_error("cannot write file: " + path);
    out << doc.dump(2) << "\n";
}

} // namespace groupshift
