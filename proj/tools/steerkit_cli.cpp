// Batch front end: self-test fidelity curves, classical baselines, mixture
// identities, state/channel certification, and SDPA export.

#include <CLI11.hpp>

#include <steerkit/json_io.hpp>
#include <steerkit/moment.hpp>
#include <steerkit/scenarios.hpp>
#include <steerkit/sdpa_io.hpp>
#include <steerkit/selftest.hpp>
#include <steerkit/steering.hpp>

#include <fstream>
#include <iostream>

using namespace steerkit;

namespace {

struct RunConfig {
    std::string scenario = "chsh";
    double alpha = 0.5;
    double violation = -1.0;      // < 0: unset
    double deviationPct = -1.0;   // percentage below the quantum bound
    int sweepPoints = 0;          // 0: single point
    std::string mode = "eq";
    double gapTol = 1e-7, feasTol = 1e-8;
    int maxIter = 200;
    int jobs = 1;
    std::string out;              // empty: stdout
    std::string format = "csv";
    std::string exportSdpa;
    int samples = 1000;
    std::string stateFile, channelFile;
    double wernerW = -1.0;
};

BellScenario make_scenario(const RunConfig& cfg) {
    if (cfg.scenario == "chsh") return chsh_scenario();
    if (cfg.scenario == "elegant") return elegant_scenario();
    if (cfg.scenario == "i3622") return i3622_scenario();
    if (cfg.scenario == "tilted") {
        if (cfg.alpha < 0.0 || cfg.alpha >= 2.0)
            throw CLI::ValidationError("--alpha", "tilt parameter must lie in [0, 2)");
        return tilted_chsh_scenario(cfg.alpha);
    }
    throw CLI::ValidationError("--scenario", "unknown scenario " + cfg.scenario);
}

SdpOptions solver_options(const RunConfig& cfg) {
    SdpOptions opts;
    opts.gapTol = cfg.gapTol;
    opts.feasTol = cfg.feasTol;
    opts.maxIter = cfg.maxIter;
    return opts;
}

void write_output(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.out);
    if (!f) throw std::runtime_error("cannot open output file " + cfg.out);
    f << text;
}

int cmd_selftest(const RunConfig& cfg) {
    BellScenario sc = make_scenario(cfg);
    ConstraintMode mode = cfg.mode == "geq" ? ConstraintMode::AtLeast : ConstraintMode::Equality;
    SdpOptions opts = solver_options(cfg);

    if (!cfg.exportSdpa.empty()) {
        double v = cfg.violation >= 0.0 ? cfg.violation
                   : cfg.deviationPct >= 0.0
                       ? sc.quantumBound * (1.0 - cfg.deviationPct / 100.0)
                       : sc.quantumBound;
        RelaxationProblem rp = assemble(sc, v, {}, mode);
        std::ofstream f(cfg.exportSdpa);
        if (!f) throw std::runtime_error("cannot open " + cfg.exportSdpa);
        export_sdpa(rp.sdp, f);
    }

    SelfTestReport rep;
    rep.scenario = sc.name;
    if (cfg.sweepPoints > 0) {
        rep = sweep(sc, cfg.sweepPoints, mode, opts, cfg.jobs);
    } else {
        double v = cfg.violation;
        if (cfg.deviationPct >= 0.0) v = sc.quantumBound * (1.0 - cfg.deviationPct / 100.0);
        if (v < 0.0) v = sc.quantumBound;
        rep.classicalFidelity = classical_fidelity_eig(sc.referenceAssemblage);
        rep.curve.push_back(fidelity_lower_bound(sc, v, {}, mode, opts));
    }

    write_output(cfg, cfg.format == "json" ? to_json(rep).dump(2) + "\n" : to_csv(rep));
    for (const CurvePoint& pt : rep.curve)
        if (pt.status != SdpStatus::Optimal) return 2;
    return 0;
}

int cmd_classical(const RunConfig& cfg) {
    BellScenario sc = make_scenario(cfg);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f\n", classical_fidelity_eig(sc.referenceAssemblage));
    write_output(cfg, buf);
    return 0;
}

int cmd_identities(const RunConfig& cfg) {
    MixtureIdentityReport rep = verify_mixture_identities(cfg.samples);
    json j = {{"samples", rep.samples}, {"max_residual", rep.maxResidual}};
    write_output(cfg, j.dump(2) + "\n");
    return rep.maxResidual < 1e-10 ? 0 : 2;
}

int cmd_certify_state(const RunConfig& cfg) {
    CMatrix rho;
    if (cfg.wernerW >= 0.0) {
        rho = werner_state(cfg.wernerW);
    } else if (!cfg.stateFile.empty()) {
        std::ifstream f(cfg.stateFile);
        if (!f) throw std::runtime_error("cannot open " + cfg.stateFile);
        rho = matrix_from_json(json::parse(f));
    } else {
        throw CLI::ValidationError("certify-state", "need --state FILE or --w VALUE");
    }
    json rep;
    auto w = ppt_witness(rho);
    if (!w) {
        rep = {{"verdict", "no-witness"}, {"value", nullptr}, {"residual", nullptr}};
    } else {
        Assemblage ref = pauli_reference_assemblage();
        CoeffMap beta = expand_coefficients(*w, ref, ref);
        double residual = (coefficients_operator(beta, ref, ref) - *w).max_abs();
        rep = {{"verdict", "entangled"},
               {"value", evaluate_diew(beta, rho, ref, ref)},
               {"residual", residual}};
    }
    write_output(cfg, rep.dump(2) + "\n");
    return 0;
}

int cmd_certify_channel(const RunConfig& cfg) {
    if (cfg.channelFile.empty())
        throw CLI::ValidationError("certify-channel", "need --channel FILE");
    std::ifstream f(cfg.channelFile);
    if (!f) throw std::runtime_error("cannot open " + cfg.channelFile);
    QubitChannel n = channel_from_json(json::parse(f));
    json rep;
    auto w = ppt_witness(choi_on_second(n));
    if (!w) {
        rep = {{"verdict", "entanglement-breaking"}, {"value", nullptr}, {"residual", nullptr}};
    } else {
        Assemblage tauHat = normalized_assemblage(pauli_reference_assemblage());
        Assemblage omega = pauli_reference_assemblage();
        CoeffMap gamma = expand_coefficients(w->transpose(), tauHat, omega);
        double residual =
            (coefficients_operator(gamma, tauHat, omega) - w->transpose()).max_abs();
        rep = {{"verdict", "non-entanglement-breaking"},
               {"value", evaluate_channel_witness(gamma, n, tauHat, omega)},
               {"residual", residual}};
    }
    write_output(cfg, rep.dump(2) + "\n");
    return 0;
}

int cmd_dump_scenario(const RunConfig& cfg) {
    write_output(cfg, scenario_to_json(make_scenario(cfg)).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"assemblage self-testing and certification toolkit"};
    app.require_subcommand(1);
    app.set_config("--config");
    RunConfig cfg;

    auto add_scenario_opts = [&](CLI::App* c) {
        c->add_option("--scenario", cfg.scenario, "chsh | tilted | elegant | i3622");
        c->add_option("--alpha", cfg.alpha, "tilt parameter, [0, 2)");
    };
    auto add_output_opts = [&](CLI::App* c) {
        c->add_option("--out", cfg.out, "output path (default stdout)");
    };

    CLI::App* st = app.add_subcommand("selftest", "fidelity lower-bound curve");
    add_scenario_opts(st);
    add_output_opts(st);
    auto* vOpt = st->add_option("--violation", cfg.violation, "observed Bell value");
    auto* dOpt = st->add_option("--deviation-pct", cfg.deviationPct,
                                "percentage below the maximal quantum violation");
    auto* sOpt = st->add_option("--sweep", cfg.sweepPoints, "grid size over [local, quantum]");
    vOpt->excludes(dOpt)->excludes(sOpt);
    dOpt->excludes(sOpt);
    st->add_option("--mode", cfg.mode, "eq | geq")
        ->check(CLI::IsMember({"eq", "geq"}));
    st->add_option("--gap-tol", cfg.gapTol)->check(CLI::PositiveNumber);
    st->add_option("--feas-tol", cfg.feasTol)->check(CLI::PositiveNumber);
    st->add_option("--max-iter", cfg.maxIter)->check(CLI::PositiveNumber);
    st->add_option("--jobs", cfg.jobs, "sweep worker count")->check(CLI::PositiveNumber);
    st->add_option("--format", cfg.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    st->add_option("--export-sdpa", cfg.exportSdpa, "also write the assembled SDP");

    CLI::App* cl = app.add_subcommand("classical", "best LHS-model fidelity");
    add_scenario_opts(cl);
    add_output_opts(cl);

    CLI::App* id = app.add_subcommand("identities", "controlled-mixture identity residuals");
    id->add_option("--samples", cfg.samples)->check(CLI::PositiveNumber);
    add_output_opts(id);

    CLI::App* cs = app.add_subcommand("certify-state", "two-qubit entanglement witness");
    cs->add_option("--state", cfg.stateFile, "density matrix JSON");
    cs->add_option("--w", cfg.wernerW, "Werner-state parameter shortcut");
    add_output_opts(cs);

    CLI::App* cc = app.add_subcommand("certify-channel", "entanglement-breaking witness");
    cc->add_option("--channel", cfg.channelFile, "Kraus-list JSON");
    add_output_opts(cc);

    CLI::App* ds = app.add_subcommand("dump-scenario", "scenario tables as JSON");
    add_scenario_opts(ds);
    add_output_opts(ds);

    try {
        app.parse(argc, argv);
        if (st->parsed()) return cmd_selftest(cfg);
        if (cl->parsed()) return cmd_classical(cfg);
        if (id->parsed()) return cmd_identities(cfg);
        if (cs->parsed()) return cmd_certify_state(cfg);
        if (cc->parsed()) return cmd_certify_channel(cfg);
        if (ds->parsed()) return cmd_dump_scenario(cfg);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
