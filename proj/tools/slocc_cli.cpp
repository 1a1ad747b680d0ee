// Command-line frontend: classify pencils and states, reproduce the
// classification tables, build limit witnesses, run the scaling normal form,
// and query existence criteria.  Outputs are deterministic for a fixed seed.

#include <clocale>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "slocc/slocc.hpp"

namespace {

using namespace slocc;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_not_fully_entangled = 2;
constexpr int exit_ill_conditioned = 3;
constexpr int exit_precondition = 4;
constexpr int exit_io = 5;

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::uint64_t seed_from_env_or(std::uint64_t fallback) {
    if (const char* env = std::getenv("SLOCC_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return v;
    }
    return fallback;
}

nlohmann::json metadata(double tol, std::uint64_t seed) {
    return {{"tol", tol}, {"seed", seed}};
}

void print_class_report(const class_report& rep, const std::vector<std::string>& notices) {
    for (const auto& note : notices) std::cerr << "note: " << note << "\n";
    std::cout << "type: " << to_string(rep.type) << "\n";
    std::cout << "kcf: " << render_pencil_spec(rep.kcf) << "\n";
    if (rep.stab_dim) std::cout << "stab_dim: " << *rep.stab_dim << "\n";
    if (rep.orbit_dim) std::cout << "orbit_dim: " << *rep.orbit_dim << "\n";
    if (rep.limit_class)
        std::cout << "limit_class: " << render_pencil_spec(*rep.limit_class) << "\n";
    if (rep.biseparable_reduct) std::cout << "biseparable_reduct: true\n";
}

int cmd_classify(const std::string& pencil, const std::string& state_file, double tol,
                 bool exact, bool json, std::uint64_t seed) {
    std::vector<std::string> notices;
    class_report rep = [&] {
        if (!pencil.empty()) {
            auto parsed = parse_pencil_spec(pencil);
            notices = parsed.notices;
            if (exact) {
                // run the full tolerance-free pipeline as a cross-check
                const auto recovered = compute_kcf_exact(kcf_to_pencil_exact(parsed.structure));
                if (!same_structure(recovered, parsed.structure, 1e-10))
                    throw ill_conditioned("exact pipeline disagrees with the parsed structure");
            }
            return report_for_structure(parsed.structure);
        }
        kcf_options opts;
        opts.seed = seed;
        return classify_state(parse_state_json(read_file(state_file)), tol, opts);
    }();
    if (json) {
        nlohmann::json doc = class_report_to_json(rep);
        doc["metadata"] = metadata(tol, seed);
        doc["metadata"]["exact"] = exact;
        std::cout << doc.dump(2) << "\n";
    } else {
        print_class_report(rep, notices);
    }
    return exit_ok;
}

int cmd_enumerate(int m, int n, const std::string& format, int threads) {
    const auto families = enumerate_classes(m, n, threads);
    std::cout << render_table(families, table_format_from_string(format));
    return exit_ok;
}

int cmd_witness(const std::string& pencil, double alpha, bool emit_json, double tol,
                std::uint64_t seed) {
    const auto parsed = parse_pencil_spec(pencil);
    const operator_family fam = witness_for(parsed.structure);
    const state_tensor rep = representative_state(parsed.structure);
    const state_tensor evolved = evaluate_family(fam, alpha, rep);
    const double ratio = evolved.norm() / rep.norm();

    nlohmann::json result;
    result["alpha"] = alpha;
    result["norm_ratio"] = ratio;
    bool matches = false;
    std::string limit_spec;
    if (fam.target().kind == family_target_kind::critical_class) {
        kcf_options opts;
        opts.seed = seed;
        opts.tol = 1e-6;
        const auto limit_ks = compute_kcf(pencil_from_state(evolved), opts);
        limit_spec = render_pencil_spec(limit_ks);
        matches = moebius_equivalent(limit_ks, *fam.target().critical_class);
        result["limit_kcf"] = limit_spec;
        result["matches_target"] = matches;
    }

    if (emit_json) {
        nlohmann::json doc = family_to_json(fam);
        doc["evaluation"] = result;
        doc["metadata"] = metadata(tol, seed);
        std::cout << doc.dump(2) << "\n";
        return exit_ok;
    }
    std::cout << "target: "
              << (fam.target().kind == family_target_kind::zero_vector ? "ZeroVector"
                                                                       : "CriticalClass")
              << "\n";
    if (fam.target().critical_class)
        std::cout << "target_class: " << render_pencil_spec(*fam.target().critical_class) << "\n";
    for (const auto& f : fam.factors()) {
        const char* side = f.side == family_side::A ? "A" : (f.side == family_side::B ? "B" : "C");
        if (const auto* e = std::get_if<expdiag_factor>(&f.payload)) {
            std::cout << "factor: " << side << " expdiag";
            for (const frac& c : e->exponents) std::cout << " " << c.num << "/" << c.den;
            std::cout << "\n";
        } else {
            std::cout << "factor: " << side << " const\n";
        }
    }
    std::cout << "norm_ratio(alpha=" << fmt(alpha) << "): " << fmt(ratio) << "\n";
    if (fam.target().kind == family_target_kind::critical_class) {
        std::cout << "limit_kcf: " << limit_spec << "\n";
        std::cout << "matches_target: " << (matches ? "yes" : "no") << "\n";
    }
    return exit_ok;
}

int cmd_normalform(const std::string& state_file, const normal_form_options& opts, bool json) {
    const auto state = parse_state_json(read_file(state_file));
    const auto rep = normal_form(state, opts);
    if (json) {
        nlohmann::json doc = normal_form_report_to_json(rep);
        doc["metadata"] = {{"eps_crit", opts.eps_crit},
                           {"eps_null", opts.eps_null},
                           {"eps_semi", opts.eps_semi},
                           {"kappa_thresh", opts.kappa_thresh},
                           {"max_iter", opts.max_iter}};
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "verdict: " << to_string(rep.verdict) << "\n";
        std::cout << "iterations: " << rep.iterations << "\n";
        std::cout << "norm_ratio: " << fmt(rep.norm_trace.back()) << "\n";
        std::cout << "cond_numbers: " << fmt(rep.cond_numbers[0]) << " "
                  << fmt(rep.cond_numbers[1]) << " " << fmt(rep.cond_numbers[2]) << "\n";
    }
    return exit_ok;
}

int cmd_crit_exists(const std::vector<int>& dims, bool json) {
    const auto res = critical_exists(dims);
    if (json) {
        nlohmann::json doc = {{"dims", dims}, {"exists", res.exists}, {"lhs", res.lhs}};
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "exists: " << (res.exists ? "yes" : "no") << "\n";
        std::cout << "lhs: " << res.lhs << "\n";
    }
    return exit_ok;
}

int cmd_balance(const std::string& mult_text, double tol, bool json, std::uint64_t seed) {
    std::vector<int> mults;
    std::stringstream ss(mult_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            mults.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw precondition_violated("balance: bad multiplicity '" + item + "'");
        }
    }
    const auto loci = balanced_eigenvalues(mults, tol, seed);
    std::vector<int> sorted = mults;
    std::sort(sorted.rbegin(), sorted.rend());
    geo_detail::vec3 total;
    for (std::size_t i = 0; i < loci.size(); ++i) {
        const auto v = eigenvalue_to_vector(loci[i], sorted[i]);
        const auto c = v.cartesian();
        total += geo_detail::vec3{c[0], c[1], c[2]} * static_cast<double>(v.mult);
    }
    const double residual = std::sqrt(total.norm2());

    if (json) {
        nlohmann::json doc;
        doc["multiplicities"] = sorted;
        doc["eigenvalues"] = nlohmann::json::array();
        for (const auto& x : loci) {
            if (x.is_infinite()) {
                doc["eigenvalues"].push_back({{"inf", true}});
            } else {
                doc["eigenvalues"].push_back(
                    {{"re", x.value().real()}, {"im", x.value().imag()}});
            }
        }
        doc["residual"] = residual;
        doc["metadata"] = metadata(tol, seed);
        std::cout << doc.dump(2) << "\n";
    } else {
        for (std::size_t i = 0; i < loci.size(); ++i)
            std::cout << "eigenvalue[" << sorted[i]
                      << "]: " << dsl_detail::describe_locus(loci[i]) << "\n";
        std::cout << "residual: " << fmt(residual) << "\n";
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"SLOCC orbit types of 2 x m x n pure states via Kronecker canonical forms"};
    app.require_subcommand(1);

    std::uint64_t seed = seed_from_env_or(0x51a7c0defULL);
    app.add_option("--seed", seed, "random seed (environment SLOCC_SEED is the fallback)");

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "orbit type of a pencil or state");
    std::string cl_pencil, cl_state;
    double cl_tol = 1e-9;
    bool cl_exact = false, cl_json = false;
    auto* opt_pencil = classify_cmd->add_option("--pencil", cl_pencil, "pencil in block syntax");
    auto* opt_state = classify_cmd->add_option("--state", cl_state, "state JSON file");
    opt_pencil->excludes(opt_state);
    classify_cmd->add_option("--tol", cl_tol, "rank tolerance (default 1e-9)");
    classify_cmd->add_flag("--exact", cl_exact, "cross-check with the exact-rational pipeline");
    classify_cmd->add_flag("--json", cl_json, "JSON output");

    // enumerate
    auto* enum_cmd = app.add_subcommand("enumerate", "list all class families of 2 x m x n");
    int en_m = 2, en_n = 2, en_threads = 1;
    std::string en_format = "md";
    enum_cmd->add_option("m", en_m, "second party dimension")->required();
    enum_cmd->add_option("n", en_n, "third party dimension")->required();
    enum_cmd->add_option("--format", en_format, "md, csv, or json (default md)");
    enum_cmd->add_option("--threads", en_threads, "worker pool size (default 1)");

    // witness
    auto* wit_cmd = app.add_subcommand("witness", "limit operator family for a pencil");
    std::string wi_pencil;
    double wi_alpha = 40.0, wi_tol = 1e-9;
    bool wi_json = false;
    wit_cmd->add_option("--pencil", wi_pencil, "pencil in block syntax")->required();
    wit_cmd->add_option("--alpha", wi_alpha, "evaluation parameter (default 40)");
    wit_cmd->add_flag("--emit-json", wi_json, "JSON output including all factors");

    // normalform
    auto* nf_cmd = app.add_subcommand("normalform", "iterative operator scaling of a state");
    std::string nf_state;
    normal_form_options nf_opts;
    bool nf_json = false;
    nf_cmd->add_option("--state", nf_state, "state JSON file")->required();
    nf_cmd->add_option("--max-iter", nf_opts.max_iter, "sweep budget (default 5000)");
    nf_cmd->add_option("--eps-crit", nf_opts.eps_crit, "criticality threshold (default 1e-9)");
    nf_cmd->add_option("--eps-null", nf_opts.eps_null, "null verdict norm ratio (default 1e-8)");
    nf_cmd->add_option("--eps-semi", nf_opts.eps_semi,
                       "semistable verdict deviation gate (default 1e-3)");
    nf_cmd->add_option("--kappa", nf_opts.kappa_thresh,
                       "condition number bound for CriticalReached (default 1e4)");
    nf_cmd->add_flag("--json", nf_json, "JSON output including the norm trace");

    // crit-exists
    auto* ce_cmd = app.add_subcommand("crit-exists", "critical-state existence for dimensions");
    std::vector<int> ce_dims;
    bool ce_json = false;
    ce_cmd->add_option("dims", ce_dims, "local dimensions d1 d2 ... dN")->expected(-2);
    ce_cmd->add_flag("--json", ce_json, "JSON output");

    // balance
    auto* ba_cmd = app.add_subcommand("balance", "balanced eigenvalues for multiplicities");
    std::string ba_mults;
    double ba_tol = 1e-10;
    bool ba_json = false;
    ba_cmd->add_option("--mults", ba_mults, "comma separated multiplicities")->required();
    ba_cmd->add_option("--tol", ba_tol, "residual bound on the weighted sum (default 1e-10)");
    ba_cmd->add_flag("--json", ba_json, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? exit_ok : exit_usage;
    }

    try {
        if (classify_cmd->parsed()) {
            if (cl_pencil.empty() == cl_state.empty()) {
                std::cerr << "classify: exactly one of --pencil or --state is required\n";
                return exit_usage;
            }
            return cmd_classify(cl_pencil, cl_state, cl_tol, cl_exact, cl_json, seed);
        }
        if (enum_cmd->parsed()) return cmd_enumerate(en_m, en_n, en_format, en_threads);
        if (wit_cmd->parsed()) return cmd_witness(wi_pencil, wi_alpha, wi_json, wi_tol, seed);
        if (nf_cmd->parsed()) return cmd_normalform(nf_state, nf_opts, nf_json);
        if (ce_cmd->parsed()) return cmd_crit_exists(ce_dims, ce_json);
        if (ba_cmd->parsed()) return cmd_balance(ba_mults, ba_tol, ba_json, seed);
        std::cerr << "no subcommand\n";
        return exit_usage;
    } catch (const not_fully_entangled& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_not_fully_entangled;
    } catch (const ill_conditioned& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_ill_conditioned;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const precondition_violated& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_precondition;
    } catch (const dimension_mismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_precondition;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    }
}
