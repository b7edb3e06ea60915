#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nangle/json_io.hpp"
#include "nangle/random.hpp"

#include <fstream>

#ifndef SCHEMA_DIR
#define SCHEMA_DIR "schemas"
#endif

using namespace nangle;

namespace {

const RingSpec z4 = RingSpec::z_mod_p2(2);
const RingSpec f3e = RingSpec::dual_numbers(3);

Json load_schema(const std::string& name)
{
    std::ifstream in(std::string(SCHEMA_DIR) + "/" + name + ".schema.json");
    REQUIRE(in.good());
    Json j;
    in >> j;
    return j;
}

} // namespace

TEST_CASE("ring and matrix encodings")
{
    CHECK(to_json(z4) == Json({{"kind", "z-mod-p2"}, {"p", 2}}));
    CHECK(ring_from_json(to_json(f3e)) == f3e);

    // dual-number entries serialize as [unit, eps] pairs
    Matrix m(f3e, 1, 2);
    m.at(0, 0) = 5; // 2 + 1*eps packs as 2 + 1*3
    m.at(0, 1) = 3; // eps
    const Json j = to_json(m);
    CHECK(j["entries"][0] == Json::array({2, 1}));
    CHECK(j["entries"][1] == Json::array({0, 1}));
    CHECK(matrix_from_json(j, f3e) == m);

    CHECK_THROWS_AS(matrix_from_json(Json{{"rows", 1}, {"cols", 1}, {"entries", {9}}}, z4),
                    std::invalid_argument);
    CHECK_THROWS_AS(ring_from_json(Json{{"kind", "z"}, {"p", 2}}), std::invalid_argument);
}

TEST_CASE("sequence and morphism round trips")
{
    SplitMix64 rng(3);
    for (int t = 0; t < 40; ++t) {
        const RingSpec spec = t % 2 == 0 ? z4 : f3e;
        const NSigmaSequence a = random_candidate(rng, spec, 4);
        CHECK(sequence_from_json(to_json(a)) == a);
        const SequenceMorphism id = SequenceMorphism::identity(a);
        CHECK(morphism_from_json(to_json(id)) == id);
    }

    // malformed input is rejected with an error, not a crash
    Json bad = to_json(f_p_sequence(z4, 4, 1));
    bad["ranks"] = {1, 1, 1};
    CHECK_THROWS(sequence_from_json(bad));
}

TEST_CASE("schema checker basics")
{
    const Json schema = {{"type", "object"},
                         {"required", {"a"}},
                         {"properties", {{"a", {{"type", "integer"}}}}}};
    CHECK_FALSE(schema_check(Json{{"a", 1}}, schema).has_value());
    CHECK(schema_check(Json{{"b", 1}}, schema).has_value());
    CHECK(schema_check(Json{{"a", "x"}}, schema).has_value());

    const Json one_of = {{"oneOf", {Json{{"type", "integer"}}, Json{{"type", "null"}}}}};
    CHECK_FALSE(schema_check(Json(3), one_of).has_value());
    CHECK_FALSE(schema_check(Json(nullptr), one_of).has_value());
    CHECK(schema_check(Json("s"), one_of).has_value());
}

TEST_CASE("domain encodings validate against the shipped schemas")
{
    SplitMix64 rng(5);
    const NSigmaSequence a = random_member(rng, z4, 4);
    CHECK_FALSE(schema_check(to_json(a.spec), load_schema("ring")).has_value());
    CHECK_FALSE(schema_check(to_json(a.maps[0]), load_schema("matrix")).has_value());
    CHECK_FALSE(schema_check(to_json(a), load_schema("sequence")).has_value());
    CHECK_FALSE(
        schema_check(to_json(SequenceMorphism::identity(a)), load_schema("morphism")).has_value());

    const NSigmaSequence dual = random_member(rng, f3e, 4);
    CHECK_FALSE(schema_check(to_json(dual), load_schema("sequence")).has_value());
}

TEST_CASE("report payloads validate against the shipped schemas")
{
    const CounterexampleReport cex = run_counterexample(4, z4, 1, 1'000'000);
    Json rep = report_envelope("counterexample", z4);
    rep["budget"] = 1'000'000;
    rep.update(to_json(cex));
    const auto err = schema_check(rep, load_schema("counterexample-report"));
    const std::string err_msg = err.value_or("");
    INFO(err_msg);
    CHECK_FALSE(err.has_value());

    const MiddlingSearchResult ms =
        search_middling_extension(SequenceMorphism::identity(f_p_sequence(z4, 4, 1)), 1, 100'000);
    Json mrep = report_envelope("middling", z4);
    mrep["rank_bound"] = 1;
    mrep["budget"] = 100'000;
    mrep["search"] = to_json(ms);
    const auto merr = schema_check(mrep, load_schema("middling-report"));
    const std::string merr_msg = merr.value_or("");
    INFO(merr_msg);
    CHECK_FALSE(merr.has_value());
}

TEST_CASE("decomposition json embeds the full witness")
{
    SplitMix64 rng(9);
    const NSigmaSequence a = random_member(rng, z4, 4);
    const Decomposition d = strip_units(a);
    const Json j = to_json(d);
    CHECK(j["witness"].size() == 4);
    CHECK(j["fp_rank"].is_number_integer());
    if (d.residual)
        CHECK(j["residual"].is_object());
    else
        CHECK(j["residual"].is_null());
}

TEST_CASE("dump is deterministic")
{
    const Json j = to_json(f_p_sequence(z4, 4, 2));
    CHECK(dump_report(j) == dump_report(j));
    CHECK(dump_report(j).back() == '\n');
}
