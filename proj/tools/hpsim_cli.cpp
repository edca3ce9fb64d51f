#include <atomic>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hpsim/cost.hpp"
#include "hpsim/decompose.hpp"
#include "hpsim/io.hpp"
#include "hpsim/recovery.hpp"
#include "hpsim/simulate.hpp"

namespace {

constexpr int kExitUsage = 2;    // parse / validation errors
constexpr int kExitDomain = 3;   // map fails a mathematical precondition
constexpr int kExitSolver = 4;   // numerical solver failure

int thread_count() {
    const char* env = std::getenv("HPSIM_THREADS");
    if (!env) return 1;
    int n = std::atoi(env);
    return n > 0 ? n : 1;
}

/// Run `fn(i)` for i in [0, n) across worker threads; callers collect
/// results into pre-sized vectors so output order stays deterministic.
void parallel_for(int n, const std::function<void(int)>& fn) {
    int workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

hpsim::CMatrix parse_observable(const std::string& what, int dim) {
    using namespace hpsim;
    if (what == "x" || what == "y" || what == "z" || what == "i" || what == "xyzi") {
        if (dim != 2) throw InvalidSpec("observable shorthand '" + what + "' is qubit-only");
        if (what == "x") return pauli_x();
        if (what == "y") return pauli_y();
        if (what == "z") return pauli_z();
        if (what == "i") return CMatrix::identity(2);
        return default_observable();
    }
    CMatrix m = matrix_from_json(read_json_file(what));
    if (m.rows != dim || m.cols != dim)
        throw InvalidSpec("observable dimension does not match the map output");
    if (!is_hermitian(m, 1e-9)) throw NotHermitian("observable must be Hermitian");
    return m;
}

std::vector<double> parse_range(const std::string& text) {
    // "start:stop:step" or a comma list of values
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double start, stop, step;
        char c1, c2;
        std::istringstream in(text);
        if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':')
            throw hpsim::InvalidSpec("range must be start:stop:step");
        if (step < 0.0) throw hpsim::InvalidSpec("range step must be non-negative");
        if (step == 0.0) {
            out.push_back(start);
        } else {
            for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
        }
        return out;
    }
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw hpsim::InvalidSpec("empty value list");
    return out;
}

void emit(const std::string& output_path, const std::string& content) {
    if (output_path.empty()) {
        std::cout << content;
    } else {
        hpsim::write_text_file(output_path, content);
    }
}

std::string spec_hash(const hpsim::ExtractionSpec& s) {
    std::string key = std::to_string(s.d) + "|";
    for (int i : s.indices) key += std::to_string(i) + ",";
    key += "|";
    for (auto [a, b] : s.pairs) key += std::to_string(a) + ":" + std::to_string(b) + ",";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016zx", std::hash<std::string>{}(key));
    return buf;
}

struct GlobalOpts {
    hpsim::NumericSettings settings;
    std::string output;
};

int run(int argc, char** argv) {
    using namespace hpsim;
    CLI::App app{"simulation-cost toolkit for Hermitian-preserving maps"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.fallthrough();  // allow the global options after a subcommand name
    app.add_option("--tol", g.settings.tol, "general numeric tolerance");
    app.add_option("--gap-tol", g.settings.gap_tol, "SDP duality-gap tolerance");
    app.add_option("--feas-tol", g.settings.feas_tol, "SDP feasibility tolerance");
    app.add_option("-o,--output", g.output, "output file (default: stdout)");

    // --- cost ---
    auto* cost = app.add_subcommand("cost", "simulation costs of a map");
    std::string cost_input, cost_model = "both";
    cost->add_option("map", cost_input, "map JSON file")->required();
    cost->add_option("--model", cost_model, "tc|qpd|both|diamond|robustness")
        ->check(CLI::IsMember({"tc", "qpd", "both", "diamond", "robustness"}));
    int cost_restarts = 200;
    std::uint64_t cost_seed = 1;
    cost->add_option("--restarts", cost_restarts, "variational restarts (diamond model)");
    cost->add_option("--seed", cost_seed, "variational seed (diamond model)");
    cost->callback([&] {
        MapRep e = map_from_json(read_json_file(cost_input));
        json out;
        out["dim_in"] = e.dim_in;
        out["dim_out"] = e.dim_out;
        if (cost_model == "tc" || cost_model == "both")
            out["gamma_tc"] = gamma_tc(e, g.settings).gamma;
        if (cost_model == "qpd" || cost_model == "both") {
            auto r = gamma_qpd(e, g.settings);
            out["gamma_qpd"] = r.gamma;
            out["qpd_weight_plus"] = r.weight_plus;
            out["qpd_weight_minus"] = r.weight_minus;
        }
        if (cost_model == "diamond")
            out["diamond_lower_bound"] =
                diamond_variational(e, cost_restarts, cost_seed, g.settings);
        if (cost_model == "robustness") out["robustness"] = robustness(e, g.settings);
        emit(g.output, out.dump(2) + "\n");
    });

    // --- decompose ---
    auto* dec = app.add_subcommand("decompose", "extract an executable decomposition");
    std::string dec_input, dec_form = "twisted";
    bool dec_verify = false;
    dec->add_option("map", dec_input, "map JSON file")->required();
    dec->add_option("--form", dec_form, "twisted|qpd")
        ->check(CLI::IsMember({"twisted", "qpd"}));
    dec->add_flag("--verify", dec_verify, "re-load the output and re-check its invariants");
    dec->callback([&] {
        MapRep e = map_from_json(read_json_file(dec_input));
        json out;
        if (dec_form == "twisted") {
            auto r = gamma_tc(e, g.settings);
            TwistedChannel t = twisted_from_certificate(e, r.m_plus, r.m_minus, r.gamma, g.settings);
            out = to_json(t);
            out["gamma"] = r.gamma;
            if (dec_verify) {
                TwistedChannel back = twisted_from_json(out);
                if (!twisted_channel_valid(back, e, g.settings.cert_tol))
                    throw InvalidCertificate("verification of the emitted twisted channel failed");
            }
        } else {
            auto r = gamma_qpd(e, g.settings);
            QpdDecomposition q =
                qpd_from_certificate(e, r.m_plus, r.m_minus, r.weight_plus, r.weight_minus,
                                     g.settings);
            out = to_json(q);
            out["gamma"] = q.gamma();
            if (dec_verify) {
                QpdDecomposition back = qpd_from_json(out);
                if (!qpd_valid(back, e, g.settings.cert_tol))
                    throw InvalidCertificate("verification of the emitted decomposition failed");
            }
        }
        emit(g.output, out.dump(2) + "\n");
    });

    // --- simulate ---
    auto* sim = app.add_subcommand("simulate", "run a sampling protocol shot by shot");
    std::string sim_decomp, sim_state, sim_obs, sim_plan;
    long long sim_shots = 0;
    std::uint64_t sim_seed = 1;
    sim->add_option("decomposition", sim_decomp, "twisted/QPD JSON file")->required();
    sim->add_option("state", sim_state, "input state JSON (matrix)")->required();
    sim->add_option("observable", sim_obs, "observable: shorthand or JSON file")->required();
    sim->add_option("--shots", sim_shots, "number of shots (overrides --plan)");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--plan", sim_plan, "\"delta,eps\" Hoeffding shot planning");
    sim->callback([&] {
        json dj = read_json_file(sim_decomp);
        CMatrix rho = matrix_from_json(read_json_file(sim_state));
        json out;
        MapRep eff;
        double overhead;
        bool is_twisted = dj.contains("branches");
        TwistedChannel tc;
        QpdDecomposition qd;
        if (is_twisted) {
            tc = twisted_from_json(dj);
            eff = effective_map(tc);
            overhead = tc.scale;
        } else if (dj.contains("terms")) {
            qd = qpd_from_json(dj);
            eff = effective_map(qd);
            overhead = qd.gamma();
        } else {
            throw InvalidSpec("decomposition file has neither 'branches' nor 'terms'");
        }
        CMatrix obs = parse_observable(sim_obs, eff.dim_out);
        long long shots = sim_shots;
        if (!sim_plan.empty()) {
            auto vals = parse_range(sim_plan);
            if (vals.size() != 2) throw InvalidSpec("--plan expects \"delta,eps\"");
            ShotPlan plan = plan_shots(vals[0], vals[1], obs, overhead);
            out["plan"] = json{{"delta", plan.delta},
                               {"eps", plan.eps},
                               {"obs_norm", plan.obs_norm},
                               {"k_factor", plan.k_factor},
                               {"overhead", plan.overhead},
                               {"shots", plan.shots}};
            if (shots <= 0) shots = plan.shots;
        }
        if (shots <= 0) throw InvalidSpec("provide --shots or --plan");
        EstimateResult r = is_twisted ? run_mcpp(tc, rho, obs, shots, sim_seed)
                                      : run_qpd(qd, rho, obs, shots, sim_seed);
        double exact = exact_expectation(eff, rho, obs);
        out["protocol"] = is_twisted ? "mcpp" : "qpd";
        out["mean"] = r.mean;
        out["variance"] = r.variance;
        out["shots"] = r.shots;
        out["seed"] = r.seed;
        out["exact"] = exact;
        out["error"] = std::abs(r.mean - exact);
        emit(g.output, out.dump(2) + "\n");
    });

    // --- figure2 ---
    auto* f2 = app.add_subcommand("figure2", "recovery-cost sweep over noise families");
    std::string f2_families = "ad,dephasing,depolarizing", f2_eps = "0:0.9:0.1",
                f2_obs = "xyzi";
    bool f2_full = false;
    f2->add_option("--families", f2_families, "comma list: ad,dephasing,depolarizing");
    f2->add_option("--eps", f2_eps, "noise strengths, start:stop:step or comma list");
    f2->add_option("--obs", f2_obs, "observable shorthand or JSON file");
    f2->add_flag("--full-inverse", f2_full, "require full map inversion, not one observable");
    f2->callback([&] {
        std::vector<std::string> families;
        std::istringstream in(f2_families);
        std::string tok;
        while (std::getline(in, tok, ',')) families.push_back(tok);
        std::vector<double> eps = parse_range(f2_eps);
        CMatrix obs = parse_observable(f2_obs, 2);
        for (const auto& fam : families) noise_family(fam, 0.0);  // validate names early
        std::vector<SweepPoint> rows(families.size() * eps.size());
        parallel_for(static_cast<int>(rows.size()), [&](int idx) {
            size_t fi = idx / eps.size(), ei = idx % eps.size();
            RecoveryProblem p{noise_family(families[fi], eps[ei]), obs, CostModel::TC, f2_full};
            SweepPoint row;
            row.family = families[fi];
            row.eps = eps[ei];
            try {
                row.cost_tc = optimal_recovery(p, g.settings).cost;
                p.cost_model = CostModel::QPD;
                row.cost_qpd = optimal_recovery(p, g.settings).cost;
            } catch (const InfeasibleRecovery&) {
                row.feasible = false;
            }
            rows[idx] = std::move(row);
        });
        std::string csv = csv_line({"family", "eps", "cost_tc", "cost_qpd", "feasible"});
        for (const auto& r : rows)
            csv += csv_line({r.family, csv_number(r.eps), csv_number(r.cost_tc),
                             csv_number(r.cost_qpd), r.feasible ? "1" : "0"});
        emit(g.output, csv);
    });

    // --- figure3 ---
    auto* f3 = app.add_subcommand("figure3", "cost sweep over random entry-extraction maps");
    int f3_d = 6, f3_trials = 30;
    std::uint64_t f3_seed = 1;
    f3->add_option("--d", f3_d, "input matrix dimension")->check(CLI::Range(2, 64));
    f3->add_option("--trials", f3_trials, "number of random extraction specs");
    f3->add_option("--seed", f3_seed, "RNG seed");
    f3->callback([&] {
        struct Row {
            std::string hash;
            int d_prime;
            double tc, qpd;
        };
        std::vector<Row> rows(f3_trials);
        std::vector<ExtractionSpec> specs(f3_trials);
        for (int t = 0; t < f3_trials; ++t) {
            RandomStream rng(f3_seed, static_cast<std::uint64_t>(t));
            specs[t] = random_extraction_spec(f3_d, rng);
        }
        parallel_for(f3_trials, [&](int t) {
            MapRep e = entry_extraction(specs[t]);
            rows[t] = {spec_hash(specs[t]), static_cast<int>(specs[t].indices.size()),
                       gamma_tc(e, g.settings).gamma, gamma_qpd(e, g.settings).gamma};
        });
        std::string csv = csv_line({"spec_hash", "d_prime", "gamma_tc", "gamma_qpd"});
        for (const auto& r : rows)
            csv += csv_line({r.hash, std::to_string(r.d_prime), csv_number(r.tc),
                             csv_number(r.qpd)});
        emit(g.output, csv);
    });

    // --- extract-map ---
    auto* em = app.add_subcommand("extract-map", "build the map of an entry-extraction spec");
    std::string em_input;
    em->add_option("spec", em_input, "extraction-spec JSON file")->required();
    em->callback([&] {
        ExtractionSpec s = spec_from_json(read_json_file(em_input));
        emit(g.output, to_json(entry_extraction(s)).dump(2) + "\n");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const hpsim::InvalidSpec& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const hpsim::SolverFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const hpsim::NoConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const hpsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
