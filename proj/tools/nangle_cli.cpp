// nangle — command-line front end for the n-angle workbench.
//
// File-in/file-out JSON, deterministic output, no network access.
//
// Exit codes: 0 success, 1 budget exhausted, 2 invalid input.

#include "nangle/json_io.hpp"
#include "nangle/props.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace nangle;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBudget = 1;
constexpr int kExitInvalid = 2;

void print_help()
{
    std::cout << R"(nangle — verification workbench for n-angles over finite local rings

Usage: nangle <command> [options]

Commands:
  check           Decide candidacy, exactness, contractibility and membership
                  for a sequence file
  cone            Mapping cone of a morphism file, with the goodness verdict
  good            Goodness verdict for a morphism file
  fillin          Enumerate fill-ins of a commuting square and find a good one
  middling        Search for a grid extension of a morphism
  verdier         Verify (--witness) or search a factorization witness
  octa            Verify an octahedron witness file
  counterexample  Reproduce the morphism of n-angles that is not middling good
  props           Run the seeded property suite
  version         Print the tool version

Options:
  --in FILE         Input JSON file
  --witness FILE    Witness JSON file (verdier)
  --out FILE        Write the report here instead of stdout
  --ring NAME       z4 z9 z25 z49 f2eps f3eps f5eps f7eps
  --n N             Sequence length (counterexample)
  --rank-bound K    Interior rank bound for grid searches (default 2)
  --budget N        Search budget (default 100000000)
  --seed S          Seed for props (default 1)
  --cases N         Case count for props (default 200)
  --jobs J          Worker threads for searches and props (default 1)

Exit codes: 0 success, 1 budget exhausted, 2 invalid input.
)";
}

struct Options {
    std::string command;
    std::optional<std::string> in, witness, out, ring;
    int n = 4;
    int rank_bound = 2;
    std::uint64_t budget = 100'000'000ULL;
    std::uint64_t seed = 1;
    std::uint64_t cases = 200;
    int jobs = 1;
};

RingSpec parse_ring(const std::string& name)
{
    if (name == "z4")
        return RingSpec::z_mod_p2(2);
    if (name == "z9")
        return RingSpec::z_mod_p2(3);
    if (name == "z25")
        return RingSpec::z_mod_p2(5);
    if (name == "z49")
        return RingSpec::z_mod_p2(7);
    if (name == "f2eps")
        return RingSpec::dual_numbers(2);
    if (name == "f3eps")
        return RingSpec::dual_numbers(3);
    if (name == "f5eps")
        return RingSpec::dual_numbers(5);
    if (name == "f7eps")
        return RingSpec::dual_numbers(7);
    throw std::invalid_argument("unknown ring '" + name + "'");
}

Json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open input file '" + path + "'");
    Json j;
    in >> j;
    return j;
}

void emit(const Options& opt, const Json& report)
{
    const std::string text = dump_report(report);
    if (opt.out) {
        std::ofstream out(*opt.out, std::ios::binary);
        if (!out)
            throw std::invalid_argument("cannot open output file '" + *opt.out + "'");
        out << text;
    } else {
        std::cout << text;
    }
}

int cmd_check(const Options& opt)
{
    const NSigmaSequence a = sequence_from_json(load_json(opt.in.value()));
    Json rep = report_envelope("check", a.spec);
    rep["n"] = a.n;
    rep["ranks"] = a.ranks;
    const bool cand = is_candidate(a);
    rep["candidate"] = cand;
    if (cand) {
        rep["exact"] = is_exact(a);
        const auto h = decide_contractible_homotopy(a);
        rep["contractible"] = h.has_value();
        if (h)
            rep["homotopy"] = to_json(*h);
        const Decomposition d = strip_units(a);
        rep["n_angle"] = !d.residual.has_value();
        rep["decomposition"] = to_json(d);
    } else {
        rep["exact"] = nullptr;
        rep["contractible"] = nullptr;
        rep["n_angle"] = false;
        rep["decomposition"] = nullptr;
    }
    emit(opt, rep);
    return kExitOk;
}

int cmd_cone(const Options& opt, bool cone_only)
{
    const SequenceMorphism phi = morphism_from_json(load_json(opt.in.value()));
    if (!is_morphism(phi))
        throw std::invalid_argument("input is not a morphism (some square fails)");
    Json rep = report_envelope(cone_only ? "cone" : "good", phi.source.spec);
    const NSigmaSequence cone = mapping_cone(phi);
    if (cone_only)
        rep["cone"] = to_json(cone);
    rep["good"] = is_good(phi);
    const auto cert = n_angle_certificate(cone);
    rep["cone_decomposition"] = cert ? to_json(*cert) : to_json(strip_units(cone));
    emit(opt, rep);
    return kExitOk;
}

int cmd_fillin(const Options& opt)
{
    const Json j = load_json(opt.in.value());
    const NSigmaSequence a = sequence_from_json(j.at("source"));
    const NSigmaSequence b = sequence_from_json(j.at("target"));
    const Matrix phi1 = matrix_from_json(j.at("phi1"), a.spec);
    const Matrix phi2 = matrix_from_json(j.at("phi2"), a.spec);

    Json rep = report_envelope("fillin", a.spec);
    rep["budget"] = opt.budget;
    int exit_code = kExitOk;
    try {
        const auto fills = enumerate_fill_ins(a, b, phi1, phi2, opt.budget);
        rep["count"] = fills.size();
        rep["first"] = fills.empty() ? Json(nullptr) : to_json(fills.front());
    } catch (const BudgetExceeded& e) {
        rep["count"] = nullptr;
        rep["count_note"] = e.what();
        exit_code = kExitBudget;
    }
    const auto good = find_good_fill_in(a, b, phi1, phi2, opt.budget);
    rep["good_fill_in"] = good ? to_json(*good) : Json(nullptr);
    if (!good)
        exit_code = kExitBudget;
    emit(opt, rep);
    return exit_code;
}

int cmd_middling(const Options& opt)
{
    const SequenceMorphism phi = morphism_from_json(load_json(opt.in.value()));
    Json rep = report_envelope("middling", phi.source.spec);
    rep["rank_bound"] = opt.rank_bound;
    rep["budget"] = opt.budget;
    const MiddlingSearchResult res =
        search_middling_extension(phi, opt.rank_bound, opt.budget, opt.jobs);
    rep["search"] = to_json(res);
    emit(opt, rep);
    return res.verdict == SearchVerdict::NoneWithinBudget ? kExitBudget : kExitOk;
}

int cmd_verdier(const Options& opt)
{
    const SequenceMorphism phi = morphism_from_json(load_json(opt.in.value()));
    Json rep = report_envelope("verdier", phi.source.spec);
    int exit_code = kExitOk;
    if (opt.witness) {
        const VerdierWitness w = verdier_from_json(load_json(*opt.witness));
        rep["mode"] = "verify";
        rep["verified"] = verify_verdier(phi, w);
    } else {
        rep["mode"] = "search";
        rep["budget"] = opt.budget;
        const VerdierSearchResult res = search_verdier(phi, opt.budget);
        rep["nodes"] = res.nodes;
        if (res.witness) {
            rep["witness"] = to_json(*res.witness);
            rep["verdict"] = "FOUND";
        } else {
            rep["witness"] = nullptr;
            rep["verdict"] = res.exhausted ? "NONE_EXHAUSTIVE" : "NONE_WITHIN_BUDGET";
            if (!res.exhausted)
                exit_code = kExitBudget;
        }
    }
    emit(opt, rep);
    return exit_code;
}

int cmd_octa(const Options& opt)
{
    const OctahedronWitness w = octahedron_from_json(load_json(opt.in.value()));
    Json rep = report_envelope("octa", w.a.spec);
    const bool relations = octahedron_relations_hold(w);
    rep["relations_hold"] = relations;
    rep["rows_are_n_angles"] =
        is_n_angle(w.a) && is_n_angle(w.b) && is_n_angle(w.c);
    if (relations) {
        const NSigmaSequence assoc = associated_n_angle(w);
        rep["associated"] = to_json(assoc);
        rep["associated_n_angle"] = is_n_angle(assoc);
    } else {
        rep["associated"] = nullptr;
        rep["associated_n_angle"] = false;
    }
    rep["verified"] = relations && rep["rows_are_n_angles"].get<bool>() &&
                      rep["associated_n_angle"].get<bool>();
    emit(opt, rep);
    return kExitOk;
}

int cmd_counterexample(const Options& opt)
{
    const RingSpec spec = parse_ring(opt.ring.value_or("z4"));
    const CounterexampleReport r =
        run_counterexample(opt.n, spec, opt.rank_bound, opt.budget, opt.jobs);
    Json rep = report_envelope("counterexample", spec);
    rep["budget"] = opt.budget;
    rep.update(to_json(r));
    emit(opt, rep);
    return r.search.verdict == SearchVerdict::NoneWithinBudget ? kExitBudget : kExitOk;
}

int cmd_props(const Options& opt)
{
    const PropertyRun run = run_properties(opt.seed, opt.cases, opt.jobs);
    Json rep = report_envelope("props", RingSpec::z_mod_p2(2));
    rep.erase("ring"); // the suite spans all rings
    rep["seed"] = run.seed;
    rep["cases"] = run.cases;
    Json results = Json::array();
    for (const auto& r : run.results) {
        Json item{{"name", r.name}, {"cases", r.cases}, {"failures", r.failures}};
        if (!r.first_failure.empty())
            item["first_failure"] = r.first_failure;
        results.push_back(std::move(item));
    }
    rep["results"] = std::move(results);
    rep["all_passed"] = run.all_passed();
    emit(opt, rep);
    return run.all_passed() ? kExitOk : kExitBudget;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h") {
        print_help();
        return args.empty() ? kExitInvalid : kExitOk;
    }
    if (args[0] == "version" || args[0] == "--version") {
        std::cout << kToolName << " " << kToolVersion << "\n";
        return kExitOk;
    }

    Options opt;
    opt.command = args[0];
    try {
        for (size_t i = 1; i < args.size(); ++i) {
            const std::string& a = args[i];
            auto next = [&]() -> const std::string& {
                if (++i >= args.size())
                    throw std::invalid_argument("missing value for " + a);
                return args[i];
            };
            if (a == "--in")
                opt.in = next();
            else if (a == "--witness")
                opt.witness = next();
            else if (a == "--out")
                opt.out = next();
            else if (a == "--ring")
                opt.ring = next();
            else if (a == "--n")
                opt.n = std::stoi(next());
            else if (a == "--rank-bound")
                opt.rank_bound = std::stoi(next());
            else if (a == "--budget")
                opt.budget = std::stoull(next());
            else if (a == "--seed")
                opt.seed = std::stoull(next());
            else if (a == "--cases")
                opt.cases = std::stoull(next());
            else if (a == "--jobs")
                opt.jobs = std::stoi(next());
            else if (a == "--help" || a == "-h") {
                print_help();
                return kExitOk;
            } else
                throw std::invalid_argument("unknown option '" + a + "'");
        }

        auto need_in = [&]() {
            if (!opt.in)
                throw std::invalid_argument("command '" + opt.command + "' needs --in FILE");
        };

        if (opt.command == "check") {
            need_in();
            return cmd_check(opt);
        }
        if (opt.command == "cone") {
            need_in();
            return cmd_cone(opt, true);
        }
        if (opt.command == "good") {
            need_in();
            return cmd_cone(opt, false);
        }
        if (opt.command == "fillin") {
            need_in();
            return cmd_fillin(opt);
        }
        if (opt.command == "middling") {
            need_in();
            return cmd_middling(opt);
        }
        if (opt.command == "verdier") {
            need_in();
            return cmd_verdier(opt);
        }
        if (opt.command == "octa") {
            need_in();
            return cmd_octa(opt);
        }
        if (opt.command == "counterexample")
            return cmd_counterexample(opt);
        if (opt.command == "props")
            return cmd_props(opt);

        throw std::invalid_argument("unknown command '" + opt.command + "'");
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return kExitBudget;
    } catch (const Json::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
}
