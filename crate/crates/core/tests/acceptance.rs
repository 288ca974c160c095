//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always show in `cargo test` output.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use divkit::convert::{
    divergence_to_dp_check, hellinger_to_dp, hellinger_tangency_residual, rdp_to_dp, Method,
};
use divkit::dist::bvn_decompose;
use divkit::divergences::{DivergenceSpec, QuasiConvexFn};
use divkit::kcut::{counterexample_gap_bound, counterexample_pair, k_cut};
use divkit::mechanisms::{
    check_claim, error_cloud, worst_case_divergence, PrivacyClaim, RandomizedResponse,
    Verification,
};
use divkit::regions::{ht_check, region_contains_region, RegionSpec};
use divkit::sample::Sampler;
use divkit::table::emit_csv;
use rand::Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, secs: f64) -> bool {
    elapsed.as_secs_f64() < secs
}

/// D²(μ₁‖μ₂) on a probability vector pair, written out directly.
fn renyi2(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * a / b).sum::<f64>().ln()
}

fn counterexample() -> Verdict {
    let start = Instant::now();
    let (mu1, mu2) = counterexample_pair(2.0, 4.0).unwrap();
    // independent brute force: p = 1/16, every bipartition of {a, b, c}
    let p = 1.0 / 16.0;
    let z = p * p + p + 1.0;
    let q = [p * p / z, p / z, 1.0 / z];
    let u = [1.0 / 3.0; 3];
    let full_oracle = renyi2(&u, &q);
    let mut cut_oracle = f64::NEG_INFINITY;
    for mask in 1u32..7 {
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..3 {
            if mask >> i & 1 == 1 {
                a += u[i];
                b += q[i];
            }
        }
        cut_oracle = cut_oracle.max(renyi2(&[a, 1.0 - a], &[b, 1.0 - b]));
    }
    let cut = k_cut(&DivergenceSpec::Renyi { alpha: 2.0 }, 2, &mu1, &mu2).unwrap();
    let bound = counterexample_gap_bound(2.0, 4.0);
    let elapsed = start.elapsed();
    // exact values of the defining expressions
    let (full_exact, cut_exact) = (3.4765416, 3.4268460);
    let ok = (full_oracle - full_exact).abs() < 1e-6
        && (cut_oracle - cut_exact).abs() < 1e-6
        && (cut.full_value - full_oracle).abs() < 1e-6
        && (cut.value - cut_oracle).abs() < 1e-6
        && cut.gap >= bound
        && (bound - (17.0625f64 / 17.0).ln()).abs() < 1e-9
        && within(elapsed, 1.0);
    verdict(
        ok,
        format!(
            "full {:.7} cut {:.7} gap {:.7} bound {:.6} in {elapsed:?}",
            cut.full_value, cut.value, cut.gap, bound
        ),
    )
}

fn eps_two_generated() -> Verdict {
    let start = Instant::now();
    let sampler = Sampler::new(2);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let (mu1, mu2) = sampler.pair(i);
        for eps in [0.0, 0.1, 1.0] {
            let c = k_cut(&DivergenceSpec::EpsDp { eps }, 2, &mu1, &mu2).unwrap();
            worst = worst.max((c.value - c.full_value).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-9 && within(elapsed, 10.0),
        format!("500 pairs, max |2-cut − Δ^ε| = {worst:.2e} in {elapsed:?}"),
    )
}

fn cut_at_support_size() -> Verdict {
    let start = Instant::now();
    let sampler = Sampler::new(3);
    let specs = [DivergenceSpec::Renyi { alpha: 2.0 }, DivergenceSpec::Tv, DivergenceSpec::Hellinger];
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = 2 + (i % 3) as usize;
        let (mu1, mu2) = sampler.pair_of_len(i, n);
        for spec in &specs {
            let c = k_cut(spec, n, &mu1, &mu2).unwrap();
            worst = worst.max((c.value - c.full_value).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-9 && within(elapsed, 30.0),
        format!("200 pairs, max |k-cut − full| = {worst:.2e} in {elapsed:?}"),
    )
}

fn cut_monotonicity() -> Verdict {
    let sampler = Sampler::new(4);
    let mut failures = 0;
    for i in 0..200 {
        let (mu1, mu2) = sampler.pair(i);
        for spec in [DivergenceSpec::Renyi { alpha: 2.0 }, DivergenceSpec::Hellinger] {
            let v: Vec<f64> = (1..=3).map(|k| k_cut(&spec, k, &mu1, &mu2).unwrap().value).collect();
            let full = spec.eval(&mu1, &mu2).unwrap();
            if !(v[0] <= v[1] + 1e-9 && v[1] <= v[2] + 1e-9 && v[2] <= full + 1e-9) {
                failures += 1;
            }
        }
    }
    verdict(failures == 0, format!("{failures} non-monotone chains out of 400"))
}

fn hypothesis_test_equivalence() -> Verdict {
    let sampler = Sampler::new(5);
    let families = [
        DivergenceSpec::EpsDp { eps: 0.5 },
        DivergenceSpec::Renyi { alpha: 2.0 },
        DivergenceSpec::Renyi { alpha: 8.0 },
        DivergenceSpec::Hellinger,
        DivergenceSpec::Kl,
        DivergenceSpec::Tv,
    ];
    let mut disagreements = 0;
    let mut checked = 0;
    for spec in &families {
        let mut found = 0;
        let mut i = 0;
        while found < 200 {
            let (mu1, mu2) = sampler.pair(i);
            let scale = sampler.rng(1 << 32 | i).random_range(0.5..1.5);
            i += 1;
            let cut = k_cut(spec, 2, &mu1, &mu2).unwrap().value;
            let rho = cut * scale;
            // levels within round-off of the cut decide nothing
            if !cut.is_finite() || (rho - cut).abs() < 1e-9 {
                continue;
            }
            found += 1;
            checked += 1;
            let h = ht_check(spec, rho, &mu1, &mu2).unwrap();
            if h.passed != (cut <= rho) {
                disagreements += 1;
            }
        }
    }
    verdict(
        disagreements == 0,
        format!("{disagreements} disagreements over {checked} instances, {} families", families.len()),
    )
}

fn randomized_response_cloud() -> Verdict {
    let start = Instant::now();
    let mech = RandomizedResponse::new(3, 0.34).unwrap();
    let cloud = error_cloud(&mech, "000", "001").unwrap();
    let tight = RegionSpec::dp((33.0f64 / 17.0).ln(), 0.0).unwrap();
    let drawn = RegionSpec::dp(0.67, 0.05).unwrap();
    let outside = cloud
        .iter()
        .filter(|p| !(tight.admits(**p) || p.is_trivial()) || !drawn.admits(**p))
        .count();
    let csv = emit_csv(&cloud, None);
    let rows = csv.lines().count() - 1;
    let elapsed = start.elapsed();
    verdict(
        cloud.len() == 256 && rows == 256 && outside == 0 && within(elapsed, 1.0),
        format!("{} points, {rows} CSV rows, {outside} outside, in {elapsed:?}", cloud.len()),
    )
}

fn conversion_sweep() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..10 {
        let alpha = 1.5 * (16.0f64 / 1.5).powf(i as f64 / 9.0);
        for j in 0..10 {
            let delta = 1e-6 * (0.5f64 / 1e-6).powf(j as f64 / 9.0);
            out.push((alpha, delta));
        }
    }
    out
}

fn conversion_formulas() -> Verdict {
    let m = rdp_to_dp(Method::Mironov, 2.0, 1.0, 0.01).unwrap().eps;
    let r = rdp_to_dp(Method::Refined, 2.0, 1.0, 0.01).unwrap().eps;
    let mut ordered = 0;
    let sweep = conversion_sweep();
    for &(alpha, delta) in &sweep {
        let a = rdp_to_dp(Method::Mironov, alpha, 1.0, delta).unwrap().eps;
        let b = rdp_to_dp(Method::Refined, alpha, 1.0, delta).unwrap().eps;
        if b <= a {
            ordered += 1;
        }
    }
    let improvement = m - r;
    let ok = (m - 5.605170).abs() < 1e-6
        && (r - 4.218876).abs() < 1e-6
        && ordered == sweep.len()
        && (improvement - 2.0 * std::f64::consts::LN_2).abs() < 1e-9;
    verdict(
        ok,
        format!(
            "mironov {m:.6} refined {r:.6}, refined ≤ mironov on {ordered}/{}, improvement {improvement:.10}",
            sweep.len()
        ),
    )
}

fn conversion_soundness() -> Verdict {
    let mut failures = Vec::new();
    let mut worst: f64 = f64::NEG_INFINITY;
    for &(alpha, delta) in &conversion_sweep() {
        let inner = RegionSpec::renyi(alpha, 1.0).unwrap();
        for method in [Method::Mironov, Method::Refined, Method::TangentNumeric] {
            let eps = rdp_to_dp(method, alpha, 1.0, delta).unwrap().eps;
            // a negative ε is a valid but vacuous improvement over ε = 0
            let outer = RegionSpec::dp(eps.max(0.0), delta).unwrap();
            let c = region_contains_region(&inner, &outer, 4096).unwrap();
            worst = worst.max(c.max_violation);
            if !c.contained {
                failures.push(format!("{method}@({alpha:.3},{delta:.1e})"));
            }
        }
    }
    let mut hd_worst: f64 = f64::NEG_INFINITY;
    let mut residuals = (f64::INFINITY, f64::NEG_INFINITY);
    for eps in [0.5, 1.0, 2.0] {
        for rho in [0.05, 0.1, 0.3] {
            let delta = hellinger_to_dp(eps, rho).unwrap().delta;
            let outer = RegionSpec::dp(eps, delta).unwrap();
            let c = region_contains_region(&RegionSpec::hellinger(rho).unwrap(), &outer, 2048).unwrap();
            hd_worst = hd_worst.max(c.max_violation);
            if !c.contained {
                failures.push(format!("hd@({eps},{rho})"));
            }
            let r = hellinger_tangency_residual(eps, rho, delta, 4096);
            residuals = (residuals.0.min(r), residuals.1.max(r));
            if !(0.0..=1e-6).contains(&r) {
                failures.push(format!("residual@({eps},{rho})={r:.2e}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "RDP worst violation {worst:.2e}, HD worst {hd_worst:.2e}, residuals in [{:.2e}, {:.2e}]; failures: {failures:?}",
            residuals.0, residuals.1
        ),
    )
}

fn weak_bvn() -> Verdict {
    let sampler = Sampler::new(9);
    let mut worst_rec: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    let mut too_many = 0;
    for i in 0..1000u64 {
        let rows = 1 + (i % 8) as usize;
        let cols = 1 + (i / 8 % 4) as usize;
        let gamma = sampler.channel(i, rows, cols);
        let d = bvn_decompose(&gamma).unwrap();
        for (r, row) in d.reconstruct().iter().zip(gamma.matrix()) {
            for (a, b) in r.iter().zip(row) {
                worst_rec = worst_rec.max((a - b).abs());
            }
        }
        worst_sum = worst_sum.max((d.total_weight() - 1.0).abs());
        if d.terms.len() > rows * cols {
            too_many += 1;
        }
    }
    let half = divkit::dist::Channel::new(
        vec!["x", "y"],
        vec!["0", "1"],
        vec![vec![0.5, 0.5], vec![0.5, 0.5]],
    )
    .unwrap();
    let d = bvn_decompose(&half).unwrap();
    let half_ok = d.terms.len() == 2
        && d.terms.iter().all(|t| t.weight == 0.5)
        && d.terms[0].rule.assignment() == [0, 0]
        && d.terms[1].rule.assignment() == [1, 1];
    verdict(
        worst_rec < 1e-12 && worst_sum < 1e-12 && too_many == 0 && half_ok,
        format!(
            "1000 channels: reconstruction {worst_rec:.2e}, weight sum {worst_sum:.2e}, {too_many} over term budget; half channel {}",
            if half_ok { "two constant rules at 0.5" } else { "wrong" }
        ),
    )
}

fn partition_supremum_is_tv() -> Verdict {
    let sampler = Sampler::new(10);
    let spec = DivergenceSpec::FSup(QuasiConvexFn::abs_first_block());
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let (mu1, mu2) = sampler.pair(i);
        let sup = spec.eval(&mu1, &mu2).unwrap();
        let tv = DivergenceSpec::Tv.eval(&mu1, &mu2).unwrap();
        let cut = k_cut(&spec, 2, &mu1, &mu2).unwrap().value;
        worst = worst.max((sup - tv).abs()).max((sup - cut).abs());
    }
    verdict(worst <= 1e-9, format!("200 pairs, max deviation {worst:.2e}"))
}

fn claim_checkers() -> Verdict {
    let mech = RandomizedResponse::new(3, 0.34).unwrap();
    let eps = (33.0f64 / 17.0).ln();
    let (d2, _) = worst_case_divergence(&mech, &DivergenceSpec::Renyi { alpha: 2.0 }).unwrap();
    let dp = check_claim(&mech, &PrivacyClaim::Dp { eps, delta: 0.0 }).unwrap();
    let rdp = check_claim(&mech, &PrivacyClaim::Rdp { alpha: 2.0, rho: d2 }).unwrap();
    let zcdp = check_claim(&mech, &PrivacyClaim::Zcdp { xi: eps, rho: 0.0 }).unwrap();
    let tightened = [
        PrivacyClaim::Dp { eps: eps - 0.01, delta: 0.0 },
        PrivacyClaim::Rdp { alpha: 2.0, rho: d2 - 0.01 },
        PrivacyClaim::Zcdp { xi: eps - 0.01, rho: 0.0 },
    ];
    let rejected = tightened
        .iter()
        .filter(|c| {
            let r = check_claim(&mech, c).unwrap();
            !r.holds && r.witness.value > r.witness.bound && r.witness.x0 != r.witness.x1
        })
        .count();
    let ok = dp.holds
        && dp.verification == Verification::Exact
        && rdp.holds
        && zcdp.holds
        && zcdp.verification == Verification::GridVerified
        && rejected == tightened.len();
    verdict(
        ok,
        format!(
            "DP {} RDP(2, {d2:.6}) {} zCDP {} ({:?}); {rejected}/{} tightened claims rejected with witnesses",
            dp.holds,
            rdp.holds,
            zcdp.holds,
            zcdp.verification,
            tightened.len()
        ),
    )
}

/// Randomized falsification of the conversion laws. Reported alongside the
/// numbered criteria; a shrunk ε that survives is inconclusive, not a pass.
fn falsification() -> (Verdict, String) {
    let spec = DivergenceSpec::Renyi { alpha: 2.0 };
    let m = rdp_to_dp(Method::Mironov, 2.0, 1.0, 0.01).unwrap().eps;
    let r = rdp_to_dp(Method::Refined, 2.0, 1.0, 0.01).unwrap().eps;
    let fm = divergence_to_dp_check(&spec, 1.0, m, 0.01, 10_000, 0).unwrap();
    let fr = divergence_to_dp_check(&spec, 1.0, r, 0.01, 10_000, 0).unwrap();
    let shrunk = divergence_to_dp_check(&spec, 1.0, r - 0.5, 0.01, 10_000, 0).unwrap();
    let sound = verdict(
        !fm.falsified && !fr.falsified,
        format!(
            "mironov {} accepted pairs, refined {} accepted pairs, none falsified",
            fm.accepted, fr.accepted
        ),
    );
    let note = if shrunk.falsified {
        format!("refined ε − 0.5 falsified after {} draws", shrunk.draws)
    } else {
        format!(
            "refined ε − 0.5 not falsified in {} accepted pairs (inconclusive, max Δ^ε {:.3e})",
            shrunk.accepted, shrunk.max_eps_divergence
        )
    };
    (sound, note)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("counterexample reproduction", counterexample),
        ("eps-divergence is 2-generated", eps_two_generated),
        ("k-cut at the support size is the divergence", cut_at_support_size),
        ("cut monotonicity", cut_monotonicity),
        ("hypothesis tests agree with the 2-cut", hypothesis_test_equivalence),
        ("randomized response error cloud", randomized_response_cloud),
        ("conversion formulas", conversion_formulas),
        ("conversion soundness by regions", conversion_soundness),
        ("weak Birkhoff-von Neumann", weak_bvn),
        ("partition supremum of |x - y| is TV", partition_supremum_is_tv),
        ("privacy claim checkers", claim_checkers),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.passed {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    let (sound, note) = falsification();
    if !sound.passed {
        failed += 1;
    }
    println!(
        "{}  - conversion falsification: {}",
        if sound.passed { "PASS" } else { "FAIL" },
        sound.detail
    );
    println!("INFO  - {note}");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
