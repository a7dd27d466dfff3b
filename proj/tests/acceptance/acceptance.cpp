// Acceptance suite: ten self-contained criteria, one [PASS]/[FAIL] line each.
// Exit code 0 iff every criterion passes. All tolerances are pinned here as
// named constants next to the checks that use them.

#include "../support.hpp"

#include "thermoformal/errors.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace thermoformal;
using namespace testsupport;
using nlohmann::json;

namespace {

int g_failures = 0;
std::string g_detail;

void note(const std::string& detail) {
    if (g_detail.empty()) g_detail = detail;
}

bool expect(bool ok, const std::string& detail) {
    if (!ok) note(detail);
    return ok;
}

bool expect_near(double got, double want, double tol, const std::string& what) {
    if (std::abs(got - want) <= tol) return true;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s: got %.15g, want %.15g (tol %.1e)", what.c_str(), got,
                  want, tol);
    note(buf);
    return false;
}

void run_criterion(int index, const std::string& title, const std::function<bool()>& body) {
    g_detail.clear();
    bool ok = false;
    std::string detail;
    try {
        ok = body();
        detail = g_detail;
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    if (ok) {
        std::printf("[PASS] %2d. %s\n", index, title.c_str());
    } else {
        ++g_failures;
        std::printf("[FAIL] %2d. %s — %s\n", index, title.c_str(),
                    detail.empty() ? "check failed" : detail.c_str());
    }
    std::fflush(stdout);
}

// ---------------------------------------------------------------- criterion 1

bool criterion_golden_values() {
    constexpr double kTol = 1e-10;
    bool ok = true;

    SubshiftSpec f2 = SubshiftSpec::full_shift(2);
    ok &= expect_near(pressure(CylinderPotential::constant_log(f2, 0.0)), std::log(2.0), kTol,
                      "pressure(full 2-shift, A=0)");

    SubshiftSpec gm(2, {{1, 1}, {1, 0}});
    ok &= expect_near(pressure(CylinderPotential::constant_log(gm, 0.0)),
                      std::log((1.0 + std::sqrt(5.0)) / 2.0), kTol,
                      "topological entropy of the golden-mean shift");

    BowenResult br = bowen_root(CylinderFunction::constant(f2, 1, 3.0), 1e-12);
    ok &= expect_near(br.beta, std::log(2.0) / std::log(3.0), kTol, "bowen_root(full 2, H=3)");
    return ok;
}

// ---------------------------------------------------------------- criterion 2

bool criterion_rpf_residuals() {
    constexpr int kSystems = 200;
    bool ok = true;
    for (int i = 0; i < kSystems && ok; ++i) {
        SplitRng rng(9002, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 4);
        const int depth = 2 + (i % 2);
        TransferOperator op = TransferOperator::build(random_potential(rng, spec, depth));
        SpectralData sd = rpf_solve(op);
        ok &= expect(sd.phi_residual <= 1e-10 * sd.lambda && sd.nu_residual <= 1e-10 * sd.lambda,
                     "eigen-residual exceeded 1e-10 * lambda at system " + std::to_string(i));

        // Duality pairing, exercised on a depth-2 operator over the original
        // alphabet (d <= 4) for every depth up to 4: bit-exact on indicators.
        TransferOperator op2 = TransferOperator::build(random_potential(rng, spec, 2));
        for (int n = 1; n <= 4 && ok; ++n) {
            WordTable table(spec, n);
            std::vector<double> w(table.size());
            for (double& x : w) x = rng.uniform(0.1, 1.0);
            CylinderMeasure nu(spec, n, std::move(w));
            CylinderMeasure dual = dual_apply(op2, nu);
            for (std::size_t t = 0; t < table.size() && ok; ++t) {
                CylinderFunction f = CylinderFunction::indicator(spec, table.word(t));
                double lhs = nu.integrate(apply(op2, f));
                double rhs = dual.integrate(f);
                ok &= expect(lhs == rhs, "duality pairing not bit-exact at system " +
                                             std::to_string(i) + ", depth " + std::to_string(n));
            }
        }
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 3

bool criterion_variational_identity() {
    constexpr double kGibbsTol = 1e-8;
    constexpr double kDominanceTol = 1e-10;
    bool ok = true;
    for (int i = 0; i < 200 && ok; ++i) {
        SplitRng rng(9003, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 4);
        const int depth = 2 + (i % 2);
        TransferOperator op = TransferOperator::build(random_potential(rng, spec, depth));
        SpectralData sd = rpf_solve(op);
        GibbsMeasure g = gibbs_measure(sd, op);
        double lhs = entropy_oracle(g.chain) + mean_log_weight(g.chain, op.rho());
        ok &= expect(std::abs(lhs - std::log(sd.lambda)) < kGibbsTol,
                     "variational identity violated at system " + std::to_string(i));
        if (i < 100) {
            MarkovMeasure other = random_markov(rng, op.spec());
            double sub = entropy_oracle(other) + mean_log_weight(other, op.rho());
            ok &= expect(sub <= std::log(sd.lambda) + kDominanceTol,
                         "variational dominance violated at system " + std::to_string(i));
        }
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 4

bool criterion_inf_formula() {
    constexpr double kMatchTol = 1e-6;
    constexpr double kGradTol = 1e-5;
    constexpr double kChainTol = 1e-9;
    bool ok = true;

    for (int i = 0; i < 50 && ok; ++i) {
        SplitRng rng(9004, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 4);
        TransferOperator op = TransferOperator::build(random_potential(rng, spec, 2));
        SpectralData sd = rpf_solve(op);
        GibbsMeasure g = gibbs_measure(sd, op);
        VariationalResult vr = entropy_variational(g.chain, op.rho(), 1);
        ok &= expect(std::abs(vr.value - entropy_oracle(g.chain)) < kMatchTol,
                     "inf-formula mismatch at system " + std::to_string(i));

        if (i < 10) { // finite-difference validation of the analytic gradient
            WordTable table(spec, 1);
            std::vector<double> t(table.size());
            for (double& x : t) x = rng.uniform(-0.5, 0.5);
            EntropyObjectiveEval ev = entropy_objective(g.chain, op.rho(), 1, t);
            const double h = 1e-6;
            for (std::size_t c = 0; c < t.size() && ok; ++c) {
                std::vector<double> tp = t, tm = t;
                tp[c] += h;
                tm[c] -= h;
                double fd = (entropy_objective(g.chain, op.rho(), 1, tp).value -
                             entropy_objective(g.chain, op.rho(), 1, tm).value) /
                            (2.0 * h);
                ok &= expect(std::abs(ev.gradient[c] - fd) <= kGradTol * std::max(1.0, std::abs(fd)),
                             "finite-difference gradient mismatch at system " + std::to_string(i));
            }
        }
    }

    for (int i = 0; i < 20 && ok; ++i) { // mismatched measures: restricted-inf dominance
        SplitRng rng(9104, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 3);
        CylinderPotential rho = TransferOperator::build(random_potential(rng, spec, 2)).rho();
        MarkovMeasure mu = random_markov(rng, spec);
        double j1 = entropy_variational(mu, rho, 1).value;
        double j2 = entropy_variational(mu, rho, 2).value;
        double h = entropy_oracle(mu);
        ok &= expect(j1 >= j2 - kChainTol && j2 >= h - kChainTol,
                     "restricted-inf dominance violated at case " + std::to_string(i));
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 5

bool criterion_minmax() {
    constexpr double kTol = 1e-4;
    constexpr int kRestarts = 8;
    bool ok = true;
    for (int i = 0; i < 20 && ok; ++i) {
        SplitRng rng(9005, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 3);
        CylinderPotential pot = random_potential(rng, spec, 2);
        double target = pressure(pot);
        VariationalResult vr =
            pressure_minmax(pot, 1, kRestarts, 500 + static_cast<std::uint64_t>(i));
        ok &= expect(std::abs(vr.value - target) < kTol,
                     "minmax missed log lambda at system " + std::to_string(i));
        ok &= expect(vr.max_intermediate_value <= target + 1e-8,
                     "minmax exceeded the pressure from below at system " + std::to_string(i));
    }
    for (int i = 0; i < 20 && ok; ++i) {
        SplitRng rng(9105, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 3);
        TransferOperator op = TransferOperator::build(random_potential(rng, spec, 2));
        TransferOperator op_t = normalize(op, rpf_solve(op));
        VariationalResult vr =
            pressure_minmax(op_t.rho(), 1, kRestarts, 600 + static_cast<std::uint64_t>(i));
        ok &= expect(std::abs(vr.value) < kTol,
                     "normalized operator minmax not zero at system " + std::to_string(i));
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 6

bool criterion_transfer_axioms() {
    constexpr double kTol = 1e-12;
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
        SplitRng rng(9006, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 4);
        TransferOperator op = TransferOperator::build(random_potential(rng, spec, 2));
        CylinderFunction a = random_function(rng, spec, 1 + rng.uniform_int(2), -1.0, 1.0);
        CylinderFunction b = random_function(rng, spec, 1 + rng.uniform_int(2), -1.0, 1.0);
        double e1 = sup_distance(apply(op, multiply(alpha_lift(a), b)), multiply(a, apply(op, b)));
        double e2 = sup_distance(apply(op, multiply(a, alpha_lift(b))), multiply(apply(op, a), b));
        ok &= expect(e1 < kTol && e2 < kTol,
                     "transfer axiom violated at system " + std::to_string(i));
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 7

bool criterion_kms() {
    constexpr double kCocycleTol = 1e-12;
    constexpr double kStateTol = 1e-9;
    constexpr double kTiltFloor = 1e-3;
    constexpr double kEquilibriumTol = 1e-8;
    bool ok = true;
    for (int i = 0; i < 6 && ok; ++i) {
        SplitRng rng(9007, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 3);
        CylinderFunction H = random_function(rng, spec, 2, 1.3, 3.0);
        double beta = rng.uniform(0.5, 2.0);
        KmsInstance inst = make_kms_instance(CylinderPotential::from_weights(H), beta);
        KmsState state = kms_measure(inst);
        auto basis = cylinder_basis(spec, 3);

        // Closed-form cocycle and composition identities.
        for (int n = 0; n <= 5 && ok; ++n) {
            CylinderFunction closed = lambda_n_closed(inst, n);
            double scale = std::max(1.0, closed.sup_norm());
            ok &= expect(sup_distance(lambda_n(inst, n), closed) / scale < kCocycleTol,
                         "cocycle closed form mismatch at instance " + std::to_string(i));
        }
        for (int n = 1; n <= 3 && ok; ++n)
            for (int m = 1; n + m <= 5 && ok; ++m) {
                CylinderFunction lhs = lambda_n_closed(inst, n + m);
                CylinderFunction rhs = multiply(lambda_n_closed(inst, n),
                                                alpha_lift_n(lambda_n_closed(inst, m), n));
                double scale = std::max(1.0, lhs.sup_norm());
                ok &= expect(sup_distance(lhs, rhs) / scale < kCocycleTol,
                             "cocycle composition mismatch at instance " + std::to_string(i));
            }

        // Approximately-proper residuals vanish for the constructed state...
        for (int n = 1; n <= 3 && ok; ++n)
            for (const CylinderFunction& a : basis) {
                KmsResidualPair r = approx_proper_residual(inst, state, a, n);
                if (!expect(r.residual < kStateTol && r.simplified_residual < kStateTol,
                            "approx-proper residual too large at instance " + std::to_string(i))) {
                    ok = false;
                    break;
                }
            }

        // ...and the crossed-product condition holds at the normalized instance.
        TransferOperator base = TransferOperator::build(CylinderPotential::from_H(H, beta));
        TransferOperator norm_op = normalize(base, rpf_solve(base));
        KmsInstance ninst = make_kms_instance(
            CylinderPotential::from_weights(reciprocal(norm_op.rho().weights())), 1.0);
        KmsState nstate = kms_measure(ninst);
        for (const CylinderFunction& a : basis)
            if (!expect(crossed_product_residual(ninst, nstate, a) < kStateTol,
                        "crossed-product residual too large at instance " + std::to_string(i))) {
                ok = false;
                break;
            }

        // Tilted states are rejected by both residuals.
        GibbsMeasure g = gibbs_measure(inst.spectral, inst.op);
        std::vector<double> p(g.chain.p().begin(), g.chain.p().end());
        p[0] += 0.05;
        double s = 0.0;
        for (double v : p) s += v;
        for (double& v : p) v /= s;
        KmsState tilted = KmsState::markov(spec, p, g.chain.P_data());
        GibbsMeasure ng = gibbs_measure(ninst.spectral, ninst.op);
        std::vector<double> np(ng.chain.p().begin(), ng.chain.p().end());
        np[0] += 0.05;
        double ns = 0.0;
        for (double v : np) ns += v;
        for (double& v : np) v /= ns;
        KmsState ntilted = KmsState::markov(spec, np, ng.chain.P_data());
        double worst_proper = 0.0, worst_crossed = 0.0;
        for (const CylinderFunction& a : basis) {
            worst_proper =
                std::max(worst_proper, approx_proper_residual(inst, tilted, a, 1).residual);
            worst_crossed = std::max(worst_crossed, crossed_product_residual(ninst, ntilted, a));
        }
        ok &= expect(worst_proper > kTiltFloor && worst_crossed > kTiltFloor,
                     "tilted state slipped through at instance " + std::to_string(i));

        // Constructed states are equilibrium states for rho = H^-beta.
        EquilibriumCheck chk = equilibrium_check(g.chain, inst.op.rho());
        ok &= expect(std::abs(chk.gap) < kEquilibriumTol,
                     "equilibrium gap too large at instance " + std::to_string(i));
    }
    return ok;
}

// ---------------------------------------------------------------- criterion 8

bool criterion_convergence() {
    constexpr double kRateSlack = 0.05;
    constexpr double kResidualTol = 1e-9;
    bool ok = true;
    int found = 0;
    for (std::uint64_t attempt = 0; found < 20 && attempt < 400 && ok; ++attempt) {
        SplitRng rng(9008, attempt);
        SubshiftSpec spec = random_primitive_spec(rng, 2, 4);
        TransferOperator op = TransferOperator::build(random_potential(rng, spec, 2));
        SpectralData sd = rpf_solve(op);
        TransferOperator op_t = normalize(op, sd);
        double gap = spectral_gap(op_t);
        if (!(gap > 0.02 && gap < 0.9)) continue;
        ++found;

        CylinderFunction a = CylinderFunction::indicator(spec, Word{0});
        ConvergenceReport rep = convergence_report(op_t, a, 25);
        int n1 = 0;
        for (int n = 0; n <= 25; ++n)
            if (rep.sup_distances[static_cast<std::size_t>(n)] > 1e-12) n1 = n;
        const int n0 = std::min(2, n1 > 0 ? n1 - 1 : 0);
        if (n1 > n0 && rep.sup_distances[static_cast<std::size_t>(n0)] > 0.0) {
            double rate = std::pow(rep.sup_distances[static_cast<std::size_t>(n1)] /
                                       rep.sup_distances[static_cast<std::size_t>(n0)],
                                   1.0 / (n1 - n0));
            ok &= expect(rate <= gap + kRateSlack,
                         "empirical decay rate above gap + 0.05 at attempt " +
                             std::to_string(attempt));
        }

        KmsInstance inst = make_kms_instance(
            CylinderPotential::from_weights(reciprocal(op_t.rho().weights())), 1.0);
        TelescopingReport tel =
            telescoping_convergence_check(inst, kms_measure(inst), a, 400);
        ok &= expect(tel.concluded && tel.fixed_point_residual < kResidualTol,
                     "telescoping check did not conclude at attempt " + std::to_string(attempt));
    }
    ok &= expect(found == 20, "could not collect 20 systems with gap in (0, 0.9)");
    return ok;
}

// ---------------------------------------------------------------- criterion 9

bool criterion_recoding() {
    constexpr double kTol = 1e-9;
    bool ok = true;
    for (int i = 0; i < 20 && ok; ++i) {
        SplitRng rng(9009, static_cast<std::uint64_t>(i));
        SubshiftSpec spec = random_primitive_spec(rng, 2, 2);
        WordTable words3(spec, 3);
        std::vector<double> w(words3.size());
        for (double& x : w) x = std::exp(rng.uniform(-2.0, 2.0));
        CylinderFunction rho3(spec, 3, w);

        TransferOperator op = TransferOperator::build(CylinderPotential::from_weights(rho3));
        SpectralData sd = rpf_solve(op);
        GibbsMeasure g = gibbs_measure(sd, op);
        Depth3Oracle oracle = depth3_oracle(spec, rho3);

        ok &= expect(std::abs(std::log(sd.lambda) - oracle.pressure) < kTol,
                     "recoded pressure mismatch at system " + std::to_string(i));
        if (!ok) break;
        const Recoding& rec = *op.recoding();
        for (std::size_t t = 0; t < oracle.words3.size() && ok; ++t) {
            auto wd = oracle.words3.word(t);
            Word enc = rec.encode(wd);
            double lib = g.chain.cylinder_weight(enc);
            ok &= expect(std::abs(lib - oracle.gibbs_weights[t]) < kTol,
                         "recoded Gibbs weight mismatch at system " + std::to_string(i) +
                             ", word " + format_word(wd));
        }
    }
    return ok;
}

// --------------------------------------------------------------- criterion 10

std::string model_path(const char* name) {
    return std::string(THERMOFORMAL_MODELS_DIR) + "/" + name;
}

bool criterion_cli() {
    bool ok = true;
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;

    { // spectral
        auto r = run_cli("spectral --model " + model_path("f2_zero.json"));
        ok &= expect(r.exit_code == 0, "spectral exited nonzero");
        if (!ok) return ok;
        json o = json::parse(r.out)["outputs"];
        ok &= expect_near(o["lambda"].get<double>(), 2.0, 1e-12, "cli spectral lambda");
        ok &= expect_near(o["phi"][0].get<double>(), 1.0, 1e-12, "cli spectral phi[0]");
        ok &= expect_near(o["nu"][1].get<double>(), 0.5, 1e-12, "cli spectral nu[1]");
    }
    { // pressure
        auto r = run_cli("pressure --model " + model_path("gm_zero.json") + " --oracle");
        ok &= expect(r.exit_code == 0, "pressure exited nonzero");
        json o = json::parse(r.out)["outputs"];
        ok &= expect_near(o["pressure"].get<double>(), std::log(golden), 1e-10, "cli pressure");
        ok &= expect(o["oracle"]["difference"].get<double>() < 1e-9, "cli pressure oracle gap");
    }
    { // gibbs: Parry weights of the golden-mean shift at depth 2
        auto r = run_cli("gibbs --model " + model_path("gm_zero.json") + " --depth 2");
        ok &= expect(r.exit_code == 0, "gibbs exited nonzero");
        json o = json::parse(r.out)["outputs"];
        const double p0 = golden * golden / (1.0 + golden * golden);
        ok &= expect_near(o["weights"][0].get<double>(), p0 / golden, 1e-10, "cli gibbs mu[00]");
        ok &= expect_near(o["weights"][1].get<double>(), p0 / (golden * golden), 1e-10,
                          "cli gibbs mu[01]");
        ok &= expect_near(o["weights"][2].get<double>(), 1.0 - p0, 1e-10, "cli gibbs mu[10]");
        ok &= expect_near(o["entropy"].get<double>(), std::log(golden), 1e-10, "cli gibbs entropy");
    }
    { // entropy (variational, against the chain oracle)
        auto r = run_cli("entropy --model " + model_path("b211.json") +
                         " --method variational --oracle");
        ok &= expect(r.exit_code == 0, "entropy exited nonzero");
        json o = json::parse(r.out)["outputs"];
        ok &= expect(o["difference"].get<double>() < 1e-8, "cli entropy oracle difference");
        ok &= expect(o["converged"].is_boolean() || o["iterations"].get<int>() > 0,
                     "cli entropy diagnostics missing");
    }
    { // minmax
        auto r = run_cli("minmax --model " + model_path("gm_zero.json") +
                         " --restarts 4 --seed 7");
        ok &= expect(r.exit_code == 0, "minmax exited nonzero");
        json o = json::parse(r.out)["outputs"];
        ok &= expect(std::abs(o["value"].get<double>() - std::log(golden)) < 1e-4 &&
                         o["value"].get<double>() <= std::log(golden) + 1e-8,
                     "cli minmax value out of range");
    }
    { // bowen-root
        auto r = run_cli("bowen-root --model " + model_path("f2_H3.json") + " --tol 1e-12");
        ok &= expect(r.exit_code == 0, "bowen-root exited nonzero");
        json o = json::parse(r.out)["outputs"];
        ok &= expect_near(o["beta"].get<double>(), std::log(2.0) / std::log(3.0), 1e-10,
                          "cli bowen-root beta");
    }
    { // kms-measure
        auto r = run_cli("kms-measure --model " + model_path("f2_H3.json") + " --depth 2");
        ok &= expect(r.exit_code == 0, "kms-measure exited nonzero");
        json o = json::parse(r.out)["outputs"];
        ok &= expect_near(o["lambda"].get<double>(), 2.0 / 3.0, 1e-12, "cli kms lambda");
        for (const auto& wv : o["weights"])
            ok &= expect_near(wv.get<double>(), 0.25, 1e-12, "cli kms weight");
    }
    { // kms-check
        auto r = run_cli("kms-check --model " + model_path("b211_kms.json") + " --n 3");
        ok &= expect(r.exit_code == 0, "kms-check exited nonzero");
        json o = json::parse(r.out)["outputs"];
        ok &= expect(o["max_residual"].get<double>() < 1e-9, "cli kms-check residual");
        ok &= expect(o["max_route_disagreement"].get<double>() < 1e-12,
                     "cli kms-check route disagreement");
        ok &= expect(o["cocycle_max_error"].get<double>() < 1e-12, "cli kms-check cocycle");
    }
    { // convergence
        auto r = run_cli("convergence --model " + model_path("b211.json") + " --n 12");
        ok &= expect(r.exit_code == 0, "convergence exited nonzero");
        json o = json::parse(r.out)["outputs"];
        const double gap = (3.0 - std::sqrt(5.0)) / (3.0 + std::sqrt(5.0));
        ok &= expect_near(o["gap"].get<double>(), gap, 1e-10, "cli convergence gap");
        double e0 = o["sup_distances"][0].get<double>();
        double e1 = o["sup_distances"][1].get<double>();
        ok &= expect_near(e1 / e0, gap, 1e-9, "cli convergence decay factor");
    }
    // Reruns are byte-identical modulo the wall-time line.
    const std::vector<std::string> rerun_cmds = {
        "spectral --model " + model_path("b211.json"),
        "minmax --model " + model_path("gm_zero.json") + " --restarts 3 --seed 5",
        "kms-check --model " + model_path("b211_kms.json") + " --n 2"};
    for (const std::string& cmd : rerun_cmds) {
        auto r1 = run_cli(cmd);
        auto r2 = run_cli(cmd);
        ok &= expect(r1.exit_code == 0 && r1.exit_code == r2.exit_code &&
                         strip_wall_time(r1.out) == strip_wall_time(r2.out),
                     "rerun not byte-identical for: " + cmd);
    }
    return ok;
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    run_criterion(1, "golden values: full-shift pressure, golden-mean entropy, Bowen root",
                  criterion_golden_values);
    run_criterion(2, "RPF residuals <= 1e-10*lambda and bit-exact duality on 200 systems",
                  criterion_rpf_residuals);
    run_criterion(3, "variational identity and dominance across 200 systems",
                  criterion_variational_identity);
    run_criterion(4, "inf-formula agreement, FD gradients, restricted-inf dominance",
                  criterion_inf_formula);
    run_criterion(5, "min-max pressure within 1e-4; zero for normalized operators",
                  criterion_minmax);
    run_criterion(6, "transfer-operator bimodule axioms within 1e-12 on 50 systems",
                  criterion_transfer_axioms);
    run_criterion(7, "KMS cocycle, residual, tilted-state, and equilibrium checks",
                  criterion_kms);
    run_criterion(8, "iterate convergence at the spectral-gap rate with telescoping bounds",
                  criterion_convergence);
    run_criterion(9, "depth-3 recoding agrees with the brute-force 2-block oracle",
                  criterion_recoding);
    run_criterion(10, "CLI end-to-end: golden envelopes and deterministic reruns",
                  criterion_cli);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d/10 criteria passed in %.1f s\n", 10 - g_failures, secs);
    return g_failures == 0 ? 0 : 1;
}
