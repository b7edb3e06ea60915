#include "nangle/json_io.hpp"

namespace nangle {

namespace {

int entry_from_json(const Json& j, const RingSpec& spec)
{
    if (spec.kind == RingSpec::Kind::DualNumbers) {
        if (!j.is_array() || j.size() != 2)
            throw std::invalid_argument("matrix entry: dual-number entries are [a, b] pairs");
        const int a = j[0].get<int>(), b = j[1].get<int>();
        if (a < 0 || a >= spec.p || b < 0 || b >= spec.p)
            throw std::invalid_argument("matrix entry: component out of range");
        return a + b * spec.p;
    }
    if (!j.is_number_integer())
        throw std::invalid_argument("matrix entry: expected an integer");
    const int v = j.get<int>();
    if (v < 0 || v >= spec.size())
        throw std::invalid_argument("matrix entry: value out of range");
    return v;
}

Json entry_to_json(int v, const RingSpec& spec)
{
    if (spec.kind == RingSpec::Kind::DualNumbers)
        return Json::array({v % spec.p, v / spec.p});
    return v;
}

} // namespace

Json to_json(const RingSpec& spec)
{
    return {{"kind", spec.kind == RingSpec::Kind::ZModPSquared ? "z-mod-p2" : "dual-numbers"},
            {"p", spec.p}};
}

RingSpec ring_from_json(const Json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    const int p = j.at("p").get<int>();
    if (kind == "z-mod-p2")
        return RingSpec::z_mod_p2(p);
    if (kind == "dual-numbers")
        return RingSpec::dual_numbers(p);
    throw std::invalid_argument("ring: unknown kind '" + kind + "'");
}

Json to_json(const Matrix& m)
{
    Json entries = Json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            entries.push_back(entry_to_json(m.at(r, c), m.spec()));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

Matrix matrix_from_json(const Json& j, const RingSpec& spec)
{
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const Json& entries = j.at("entries");
    if (rows < 0 || cols < 0 || static_cast<int>(entries.size()) != rows * cols)
        throw std::invalid_argument("matrix: entry count does not match rows*cols");
    Matrix m(spec, rows, cols);
    int k = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m.at(r, c) = entry_from_json(entries[k++], spec);
    return m;
}

Json to_json(const NSigmaSequence& a)
{
    Json maps = Json::array();
    for (const Matrix& m : a.maps)
        maps.push_back(to_json(m));
    return {{"ring", to_json(a.spec)}, {"n", a.n}, {"ranks", a.ranks}, {"maps", std::move(maps)}};
}

NSigmaSequence sequence_from_json(const Json& j)
{
    const RingSpec spec = ring_from_json(j.at("ring"));
    const int n = j.at("n").get<int>();
    const std::vector<int> ranks = j.at("ranks").get<std::vector<int>>();
    std::vector<Matrix> maps;
    for (const Json& m : j.at("maps"))
        maps.push_back(matrix_from_json(m, spec));
    return {spec, n, ranks, std::move(maps)};
}

Json to_json(const SequenceMorphism& phi)
{
    Json comp = Json::array();
    for (const Matrix& m : phi.components)
        comp.push_back(to_json(m));
    return {{"source", to_json(phi.source)},
            {"target", to_json(phi.target)},
            {"components", std::move(comp)}};
}

SequenceMorphism morphism_from_json(const Json& j)
{
    NSigmaSequence source = sequence_from_json(j.at("source"));
    NSigmaSequence target = sequence_from_json(j.at("target"));
    std::vector<Matrix> comp;
    for (const Json& m : j.at("components"))
        comp.push_back(matrix_from_json(m, source.spec));
    return {std::move(source), std::move(target), std::move(comp)};
}

Json to_json(const Decomposition& d)
{
    Json trivials = Json::array();
    for (const auto& [slot, mult] : d.trivial_summands)
        trivials.push_back({{"slot", slot}, {"multiplicity", mult}});
    Json witness = Json::array();
    for (const Matrix& w : d.witness)
        witness.push_back(to_json(w));
    Json out{{"trivial_summands", std::move(trivials)},
             {"fp_rank", d.fp_rank},
             {"witness", std::move(witness)}};
    if (d.residual) {
        out["residual"] = to_json(*d.residual);
        out["residual_reason"] = d.residual_reason;
    } else {
        out["residual"] = nullptr;
    }
    return out;
}

Json to_json(const ContractingHomotopy& h)
{
    Json theta = Json::array();
    for (const Matrix& t : h.theta)
        theta.push_back(to_json(t));
    return {{"theta", std::move(theta)}};
}

Json to_json(const MiddlingDiagram& d)
{
    Json h = Json::array(), v = Json::array();
    for (int i = 0; i < d.n; ++i) {
        Json hrow = Json::array(), vrow = Json::array();
        for (int j = 0; j < d.n; ++j) {
            hrow.push_back(to_json(d.hmaps[i][j]));
            vrow.push_back(to_json(d.vmaps[i][j]));
        }
        h.push_back(std::move(hrow));
        v.push_back(std::move(vrow));
    }
    return {{"ring", to_json(d.spec)},
            {"n", d.n},
            {"ranks", d.ranks},
            {"hmaps", std::move(h)},
            {"vmaps", std::move(v)}};
}

MiddlingDiagram middling_from_json(const Json& j)
{
    const RingSpec spec = ring_from_json(j.at("ring"));
    const int n = j.at("n").get<int>();
    const auto ranks = j.at("ranks").get<std::vector<std::vector<int>>>();
    std::vector<std::vector<Matrix>> h, v;
    for (const Json& row : j.at("hmaps")) {
        std::vector<Matrix> r;
        for (const Json& m : row)
            r.push_back(matrix_from_json(m, spec));
        h.push_back(std::move(r));
    }
    for (const Json& row : j.at("vmaps")) {
        std::vector<Matrix> r;
        for (const Json& m : row)
            r.push_back(matrix_from_json(m, spec));
        v.push_back(std::move(r));
    }
    return {spec, n, ranks, std::move(h), std::move(v)};
}

namespace {

Json matrices_to_json(const std::vector<Matrix>& ms)
{
    Json out = Json::array();
    for (const Matrix& m : ms)
        out.push_back(to_json(m));
    return out;
}

std::vector<Matrix> matrices_from_json(const Json& j, const RingSpec& spec)
{
    std::vector<Matrix> out;
    for (const Json& m : j)
        out.push_back(matrix_from_json(m, spec));
    return out;
}

} // namespace

Json to_json(const OctahedronWitness& w)
{
    return {{"row_a", to_json(w.a)},       {"row_b", to_json(w.b)}, {"row_c", to_json(w.c)},
            {"phi", matrices_to_json(w.phi)}, {"psi", matrices_to_json(w.psi)},
            {"lambda", matrices_to_json(w.lambda)}};
}

OctahedronWitness octahedron_from_json(const Json& j)
{
    NSigmaSequence a = sequence_from_json(j.at("row_a"));
    NSigmaSequence b = sequence_from_json(j.at("row_b"));
    NSigmaSequence c = sequence_from_json(j.at("row_c"));
    const RingSpec spec = a.spec;
    return {std::move(a),
            std::move(b),
            std::move(c),
            matrices_from_json(j.at("phi"), spec),
            matrices_from_json(j.at("psi"), spec),
            matrices_from_json(j.at("lambda"), spec)};
}

Json to_json(const VerdierWitness& w)
{
    return {{"s_row", to_json(w.s_row)},
            {"t_row", to_json(w.t_row)},
            {"r_row", to_json(w.r_row)},
            {"mu1", matrices_to_json(w.mu1)},
            {"mu2", matrices_to_json(w.mu2)},
            {"lambda_t", matrices_to_json(w.lambda_t)},
            {"nu1", matrices_to_json(w.nu1)},
            {"nu2", matrices_to_json(w.nu2)},
            {"gamma_r", matrices_to_json(w.gamma_r)}};
}

VerdierWitness verdier_from_json(const Json& j)
{
    NSigmaSequence s = sequence_from_json(j.at("s_row"));
    const RingSpec spec = s.spec;
    return {std::move(s),
            sequence_from_json(j.at("t_row")),
            sequence_from_json(j.at("r_row")),
            matrices_from_json(j.at("mu1"), spec),
            matrices_from_json(j.at("mu2"), spec),
            matrices_from_json(j.at("lambda_t"), spec),
            matrices_from_json(j.at("nu1"), spec),
            matrices_from_json(j.at("nu2"), spec),
            matrices_from_json(j.at("gamma_r"), spec)};
}

Json to_json(const MiddlingSearchResult& r)
{
    Json out{{"verdict", to_string(r.verdict)},
             {"column_candidates", r.column_candidates},
             {"combos_total", r.combos_total},
             {"combos_processed", r.combos_processed},
             {"nodes", r.nodes}};
    if (r.diagram)
        out["diagram"] = to_json(*r.diagram);
    else
        out["diagram"] = nullptr;
    return out;
}

Json to_json(const CounterexampleReport& r)
{
    Json shapes = Json::array();
    for (const ForcedShape& s : r.third_row_shapes)
        shapes.push_back({{"row", s.row_index},
                          {"strip", s.strip},
                          {"rows", s.rows},
                          {"cols", s.cols},
                          {"cells", s.cells}});
    return {{"n", r.n},
            {"ring", to_json(r.spec)},
            {"rank_bound", r.rank_bound},
            {"is_morphism", r.morphism_ok},
            {"is_weak_isomorphism", r.weak_isomorphism},
            {"is_good", r.good},
            {"search", to_json(r.search)},
            {"column_decompositions", r.column_decompositions},
            {"third_row_shapes", std::move(shapes)},
            {"trace_row_completable", r.trace_row_completable}};
}

Json to_json(const SummandLemmaReport& r)
{
    Json trivials = Json::array();
    for (const auto& [slot, mult] : r.trivial_summands)
        trivials.push_back({{"slot", slot}, {"multiplicity", mult}});
    return {{"base", r.base_is_p ? "p" : "0"},
            {"fp_rank", r.fp_rank},
            {"trivial_summands", std::move(trivials)},
            {"found", r.found}};
}

Json report_envelope(const std::string& command, const RingSpec& spec)
{
    return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
            {"command", command},
            {"ring", to_json(spec)}};
}

std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

std::optional<std::string> schema_check(const Json& value, const Json& schema)
{
    auto type_matches = [](const Json& v, const std::string& t) {
        if (t == "object")
            return v.is_object();
        if (t == "array")
            return v.is_array();
        if (t == "integer")
            return v.is_number_integer();
        if (t == "number")
            return v.is_number();
        if (t == "string")
            return v.is_string();
        if (t == "boolean")
            return v.is_boolean();
        if (t == "null")
            return v.is_null();
        return false;
    };

    if (schema.contains("oneOf")) {
        for (const Json& sub : schema.at("oneOf"))
            if (!schema_check(value, sub))
                return std::nullopt;
        return "value matches no oneOf branch";
    }
    if (schema.contains("type")) {
        const Json& t = schema.at("type");
        if (t.is_string()) {
            if (!type_matches(value, t.get<std::string>()))
                return "expected type " + t.get<std::string>();
        } else {
            bool any = false;
            for (const Json& tt : t)
                any = any || type_matches(value, tt.get<std::string>());
            if (!any)
                return "value matches none of the allowed types";
        }
    }
    if (schema.contains("enum")) {
        bool any = false;
        for (const Json& e : schema.at("enum"))
            any = any || e == value;
        if (!any)
            return "value not in enum";
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const Json& k : schema.at("required"))
                if (!value.contains(k.get<std::string>()))
                    return "missing required key '" + k.get<std::string>() + "'";
        if (schema.contains("properties"))
            for (auto it = schema.at("properties").begin(); it != schema.at("properties").end();
                 ++it)
                if (value.contains(it.key()))
                    if (auto err = schema_check(value.at(it.key()), it.value()))
                        return it.key() + ": " + *err;
    }
    if (value.is_array() && schema.contains("items")) {
        size_t i = 0;
        for (const Json& item : value) {
            if (auto err = schema_check(item, schema.at("items")))
                return "[" + std::to_string(i) + "]: " + *err;
            ++i;
        }
    }
    return std::nullopt;
}

} // namespace nangle
