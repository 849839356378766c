//! Acceptance suite. Each test prints one `PASS` or `FAIL` line and then
//! asserts it.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use convfpp::bounds::poisson_tail_check;
use convfpp::engine::{init_trial, run_trial, Caps, TrialConfig};
use convfpp::lattice_lab::{
    closed_site_density, closed_site_field, estimate_extinction, origin_encapsulated,
};
use convfpp::model::{
    sample_clock, ClockKey, ClockKind, ClockMode, LatticeSite, ModelParams, RandomField, SiteId,
    TreeSite,
};
use convfpp::ssp::{
    coupling_batch, estimate_red_survival, run_ssp, sample_inequality, seed_density, Color,
    RedClock, SeedField, SeedSource, SspParams,
};
use convfpp::stats::{ols, wilson_interval, SurvivalEstimate, WilsonInterval};
use convfpp::tree_lab::{
    brw_min_cloud, brw_min_exact, brw_stats, dstar_probability, estimate_subbox_good_prob,
    gamma_star, BrwMethod,
};
use convfpp::trials::par_trials;

fn report(name: &str, ok: bool, detail: String) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name} failed: {detail}");
}

fn ci(w: &WilsonInterval) -> String {
    format!(
        "{}/{} [{:.3}, {:.3}]",
        w.successes, w.trials, w.lower, w.upper
    )
}

#[test]
fn determinism() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut same = 0;
    for _ in 0..100 {
        let lambda = rng.random_range(0.2..3.0);
        let rho = rng.random_range(0.0..1.0);
        let field = RandomField::new(rng.random(), rng.random_range(0..1_000_000));
        let (params, cfg) = if rng.random_bool(0.5) {
            let caps = Caps {
                max_sites: 200_000,
                ..Caps::default()
            };
            (
                ModelParams::tree(3, lambda, rho).unwrap(),
                TrialConfig::to_target(10).with_caps(caps),
            )
        } else {
            let mode = if rng.random_bool(0.5) {
                ClockMode::Static
            } else {
                ClockMode::Resample
            };
            let p = ModelParams::lattice(2, lambda, rho)
                .unwrap()
                .with_mode(mode)
                .unwrap();
            (p, TrialConfig::to_target(20))
        };
        let a = run_trial(&params, &field, cfg.clone()).unwrap();
        let b = run_trial(
            &params,
            &RandomField::new(field.master_seed, field.trial_index),
            cfg,
        )
        .unwrap();
        same += a.same_bits(&b) as u32;
    }
    report(
        "determinism",
        same == 100,
        format!("{same}/100 replays bitwise identical"),
    );
}

fn ks_exp(samples: &mut [f64], rate: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn corr(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn tree_site(i: usize, depth: usize) -> TreeSite {
    let mut labels = vec![(i % 3) as u8];
    let mut rest = i / 3;
    for _ in 1..depth {
        labels.push((rest & 1) as u8);
        rest >>= 1;
    }
    TreeSite::from_labels(3, labels).unwrap()
}

#[test]
fn clock_laws() {
    const N: usize = 100_000;
    // 1.63 / sqrt(n) is the asymptotic 1% critical value.
    let crit = 1.6276 / (N as f64).sqrt();
    let (lambda, rho) = (2.5, 0.7);
    let field = RandomField::new(31, 4);
    let tree = ModelParams::tree(3, lambda, rho).unwrap();
    let lat = ModelParams::lattice(2, lambda, rho).unwrap();
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut detail = String::new();
    for (kind, rate) in [
        (ClockKind::T1, 1.0),
        (ClockKind::Tu, lambda),
        (ClockKind::Td, lambda),
    ] {
        let mut xs: Vec<f64> = (0..N)
            .map(|i| {
                let c = tree_site(i, 17);
                let key = ClockKey::tree_edge(kind, &c.parent().unwrap(), &c).unwrap();
                sample_clock(&field, &tree, &key).unwrap()
            })
            .collect();
        let ks = ks_exp(&mut xs, rate);
        ok &= ks < crit;
        worst = worst.max(ks);
        detail += &format!("tree {kind:?} D={ks:.5}; ");
    }
    let side = 317;
    let site = |i: usize| LatticeSite::new(vec![(i % side) as i32, (i / side) as i32]);
    for (kind, rate) in [
        (ClockKind::T1, 1.0),
        (ClockKind::T2, lambda),
        (ClockKind::T3, lambda),
        (ClockKind::Conv, rho),
    ] {
        let mut xs: Vec<f64> = (0..N)
            .map(|i| {
                let x = site(i);
                let key = if kind == ClockKind::Conv {
                    ClockKey::site(kind, &SiteId::from(x)).unwrap()
                } else {
                    let mut y = x.coords().to_vec();
                    y[1] += 1;
                    ClockKey::lattice_edge(kind, &x, &LatticeSite::new(y)).unwrap()
                };
                sample_clock(&field, &lat, &key).unwrap()
            })
            .collect();
        let ks = ks_exp(&mut xs, rate);
        ok &= ks < crit;
        worst = worst.max(ks);
        detail += &format!("lattice {kind:?} D={ks:.5}; ");
    }
    // Adjacent keys: consecutive lattice edges along a row, and parent and
    // child edges on the tree.
    let (mut a, mut b) = (Vec::with_capacity(N), Vec::with_capacity(N));
    for i in 0..N {
        let x = site(i).coords().to_vec();
        let y = vec![x[0] + 1, x[1]];
        let z = vec![x[0] + 2, x[1]];
        let e = |p: &[i32], q: &[i32]| {
            let key = ClockKey::lattice_edge(
                ClockKind::T1,
                &LatticeSite::new(p.to_vec()),
                &LatticeSite::new(q.to_vec()),
            )
            .unwrap();
            sample_clock(&field, &lat, &key).unwrap()
        };
        a.push(e(&x, &y));
        b.push(e(&y, &z));
    }
    let r_lat = corr(&a, &b);
    let (mut a, mut b) = (Vec::with_capacity(N), Vec::with_capacity(N));
    for i in 0..N {
        let c = tree_site(i, 17);
        let p = c.parent().unwrap();
        let key_c = ClockKey::tree_edge(ClockKind::T1, &p, &c).unwrap();
        let key_p = ClockKey::tree_edge(ClockKind::T1, &p.parent().unwrap(), &p).unwrap();
        a.push(sample_clock(&field, &tree, &key_c).unwrap());
        b.push(sample_clock(&field, &tree, &key_p).unwrap());
    }
    let r_tree = corr(&a, &b);
    ok &= r_lat.abs() < 0.01 && r_tree.abs() < 0.01;
    report(
        "clock laws",
        ok,
        format!("max KS {worst:.5} < {crit:.5}; adjacent r lattice {r_lat:.4}, tree {r_tree:.4}; {detail}"),
    );
}

#[test]
fn fpp_oracle() {
    let mut bad = Vec::new();
    let mut checked = 0usize;
    for t in 0..50 {
        let field = RandomField::new(808, t);
        // Tree, whole ball of depth 8.
        let oracle = common::tree_t1_distances(&field, 3, 8);
        let p = ModelParams::tree(3, 1.3, 0.0).unwrap();
        let mut cfg = TrialConfig::bounded(8);
        cfg.target = None;
        let mut w = init_trial(&p, &field, cfg).unwrap();
        w.run().unwrap();
        for (site, want) in &oracle {
            let got = w.record(&SiteId::from(site.clone())).and_then(|r| r.tau1);
            checked += 1;
            if got != Some(*want) {
                bad.push(format!("tree {t} {site:?}: {got:?} vs {want}"));
            }
        }
        // Tree, stopped at the first depth-8 arrival.
        let mut w = init_trial(&p, &field, TrialConfig::to_target(8)).unwrap();
        let out = w.run().unwrap();
        for (site, want) in &oracle {
            let got = w
                .record(&SiteId::from(site.clone()))
                .and_then(|r| r.tau1)
                .filter(|&x| x <= out.stop_time);
            let want = Some(*want).filter(|&x| x <= out.stop_time);
            if got != want {
                bad.push(format!("tree ball {t} {site:?}: {got:?} vs {want:?}"));
            }
        }
        // Lattice, box of radius 12.
        let oracle = common::lattice_distances(&field, 2, 12, |x| x);
        let p = ModelParams::lattice(2, 0.8, 0.0).unwrap();
        let mut w = init_trial(&p, &field, TrialConfig::bounded(12)).unwrap();
        w.run().unwrap();
        for (site, want) in &oracle {
            let got = w.record(&SiteId::from(site.clone())).and_then(|r| r.tau1);
            checked += 1;
            if got != Some(*want) {
                bad.push(format!("lattice {t} {site:?}: {got:?} vs {want}"));
            }
        }
        // Red process with no seeds.
        let oracle = common::lattice_distances(&field, 2, 12, |x| x.min(1.0));
        let seeds = SeedField::from_fn(2, 12, |_| false).unwrap();
        let ssp = SspParams::new(4001.0, RedClock::ExpCapped(1.0)).unwrap();
        let (st, _) = run_ssp(&ssp, &seeds, &field).unwrap();
        for (site, want) in &oracle {
            checked += 1;
            if st.time(site.coords()) != Some(*want) || st.color(site.coords()) != Some(Color::Red)
            {
                bad.push(format!(
                    "ssp {t} {site:?}: {:?} vs {want}",
                    st.time(site.coords())
                ));
            }
        }
    }
    report(
        "fpp oracle",
        bad.is_empty(),
        format!("{checked} occupation times compared exactly on 50 fields (tree depth 8, lattice and red radius 12); mismatches {:?}", bad.iter().take(3).collect::<Vec<_>>()),
    );
}

#[test]
fn brw_minima() {
    let mut ok = true;
    let mut detail = String::new();
    for n in [5usize, 10, 15, 20] {
        let pairs = par_trials(5150, 200, |f| {
            Ok((brw_min_exact(f, 3, n)?, brw_min_cloud(f, 3, n, 100_000)?))
        })
        .unwrap();
        let diffs: Vec<f64> = pairs.iter().map(|(e, c)| c - e).collect();
        let m = diffs.iter().sum::<f64>() / 200.0;
        let sd = (diffs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 199.0).sqrt();
        let se = sd / (200f64).sqrt();
        let in_band = m >= 0.0 && m <= 2.0 * se && diffs.iter().all(|&x| x >= 0.0);
        ok &= in_band;
        detail += &format!("n={n} mean(cloud-exact)={m:.3e} se={se:.3e}; ");
    }
    let g = gamma_star(3).unwrap();
    let g_oracle = common::gamma_star_oracle(3);
    let s = brw_stats(
        3,
        40,
        BrwMethod::TruncatedCloud { width: 100_000 },
        100,
        5151,
    )
    .unwrap();
    let ratio_se = s.se_mn / 40.0;
    ok &= (g - g_oracle).abs() < 1e-6 && (g_oracle - 0.232).abs() < 1e-3;
    ok &= (0.24..=0.31).contains(&s.ratio) && s.ratio < 0.5;
    report(
        "brw minima",
        ok,
        format!("{detail}gamma*(3)={g:.5} (oracle {g_oracle:.5}); M_40/40={:.4} se {ratio_se:.4} over 100 trials", s.ratio),
    );
}

#[test]
fn subbox_scaling() {
    let cells: Vec<_> = [8usize, 12, 16, 20]
        .iter()
        .map(|&k| estimate_subbox_good_prob(k, 0.1, 1.0, 3, 2000, 1717, 0, 0.95).unwrap())
        .collect();
    let mut ok = true;
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if cells[i].good.separated_from(&cells[j].good) {
                ok &= cells[j].good.point > cells[i].good.point;
            }
        }
    }
    // log(1 - p) with (failures + 1/2) / (n + 1), finite when a cell has no
    // bad sub-box.
    let fit = |cells: &[convfpp::tree_lab::SubBoxResult]| {
        let ks: Vec<f64> = cells.iter().map(|c| c.k as f64).collect();
        let ys: Vec<f64> = cells
            .iter()
            .map(|c| {
                let fail = (c.trials - c.good.successes) as f64;
                ((fail + 0.5) / (c.trials as f64 + 1.0)).ln()
            })
            .collect();
        ols(&ks, &ys).unwrap()
    };
    let main = fit(&cells);
    ok &= main.slope < 0.0;
    let small: Vec<_> = [2usize, 3, 4, 5, 6]
        .iter()
        .map(|&k| estimate_subbox_good_prob(k, 0.1, 1.0, 3, 2000, 1718, 0, 0.95).unwrap())
        .collect();
    let low = fit(&small);
    ok &= low.slope < 0.0;
    let show = |cs: &[convfpp::tree_lab::SubBoxResult]| {
        cs.iter()
            .map(|c| format!("k={} {}", c.k, ci(&c.good)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    report(
        "subbox scaling",
        ok,
        format!(
            "{}; slope of log(1-p) {:.4} (se {:.4}); small-k check {} slope {:.4}",
            show(&cells),
            main.slope,
            main.slope_se,
            show(&small),
            low.slope
        ),
    );
}

/// Exhaustive upward paths from depth 4 below `[0]`, skipping its child 0.
fn dstar_oracle(field: &RandomField, lambda: f64) -> bool {
    let params = ModelParams::tree(3, lambda, 0.0).unwrap();
    let mut best = f64::INFINITY;
    for tail in 0..8u8 {
        let labels = vec![0, 1, tail & 1, (tail >> 1) & 1, (tail >> 2) & 1];
        let leaf = TreeSite::from_labels(3, labels).unwrap();
        let mut total = 0.0;
        let mut c = leaf;
        while c.depth() > 1 {
            let p = c.parent().unwrap();
            let key = ClockKey::tree_edge(ClockKind::Tu, &p, &c).unwrap();
            total += sample_clock(field, &params, &key).unwrap();
            c = p;
        }
        best = best.min(total);
    }
    best >= 20.0
}

#[test]
fn dstar_oracle_agreement() {
    let mut ok = true;
    let mut detail = String::new();
    for lambda in [1.0, 0.1, 0.07] {
        let est = dstar_probability(2, lambda, 3, 2000, 4242, 0.95).unwrap();
        let hits = (0..2000)
            .filter(|&t| dstar_oracle(&RandomField::new(4242, t), lambda))
            .count() as f64;
        let p = hits / 2000.0;
        let se = (p * (1.0 - p) / 2000.0).sqrt();
        let agree = (est.point - p).abs() <= 2.0 * se || est.point == p;
        ok &= agree;
        detail += &format!("lambda={lambda}: estimate {} oracle {p:.4}; ", ci(&est));
    }
    report("dstar oracle", ok, detail);
}

#[test]
fn closed_forms() {
    let mut ok = true;
    let mut detail = String::new();
    for (i, rho) in [1.0f64, 4.0, 20.0].into_iter().enumerate() {
        let (_, e) = closed_site_density(rho, 2, 224, &RandomField::new(99, i as u64)).unwrap();
        let want = rho / (rho + 4.0);
        let se = (want * (1.0 - want) / e.sites as f64).sqrt();
        let z = (e.density - want) / se;
        ok &= z.abs() < 3.0 && e.sites >= 100_000;
        detail += &format!(
            "closed rho={rho}: {:.5} vs {want:.5} (z={z:.2}, r2={:.4}, n={}); ",
            e.density, e.pair_correlation, e.sites
        );
    }
    for (i, (c, lambda, rho)) in [(3.0f64, 1e-4, 1e-4), (2.0, 0.01, 0.01), (1.5, 0.05, 0.1)]
        .into_iter()
        .enumerate()
    {
        let src = SeedSource::Coupled { c, lambda, rho };
        let (_, e) = seed_density(src, 2, 224, &RandomField::new(98, i as u64)).unwrap();
        let want =
            1.0 - (1.0 - (-c).exp()).powi(4) * (-8.0 * lambda * c * c).exp() * (-rho * c * c).exp();
        let se = (want * (1.0 - want) / e.sites as f64).sqrt();
        let z = (e.density - want) / se;
        ok &= z.abs() < 3.0 && e.sites >= 100_000;
        detail += &format!(
            "seeds C={c} lambda={lambda} rho={rho}: {:.5} vs {want:.5} (z={z:.2}, r2={:.4}); ",
            e.density, e.pair_correlation
        );
    }
    report("closed forms", ok, detail);
}

fn lattice_witness(lambda: f64, rho: f64, seed: u64) -> SurvivalEstimate {
    let p = ModelParams::lattice(2, lambda, rho).unwrap();
    estimate_extinction(&p, 50, 200, Caps::default(), seed, 0.95).unwrap()
}

#[test]
fn lattice_extinction_witness() {
    let e = lattice_witness(1.5, 1.0, 12);
    let ok = e.extinct as f64 >= 0.95 * 200.0 && e.capped as f64 <= 0.01 * 200.0;
    report(
        "lattice extinction witness",
        ok,
        format!(
            "lambda=1.5 rho=1 R=50: extinct {}, capped {}",
            ci(&e.extinct_ci),
            e.capped
        ),
    );
}

#[test]
fn lattice_survival_witness() {
    let s = lattice_witness(0.05, 0.01, 14);
    let x = lattice_witness(1.5, 1.0, 12);
    let ok = s.survived as f64 >= 0.5 * 200.0 && s.survived_ci.separated_from(&x.survived_ci);
    report(
        "lattice survival witness",
        ok,
        format!(
            "lambda=0.05 rho=0.01 R=50: survived {}; extinction point survived {}",
            ci(&s.survived_ci),
            ci(&x.survived_ci)
        ),
    );
}

#[test]
fn tree_survival_witness() {
    let run = |lambda: f64| {
        let p = ModelParams::tree(3, lambda, 0.1).unwrap();
        let caps = Caps {
            max_sites: 20_000_000,
            ..Caps::default()
        };
        let cfg = TrialConfig::to_target(30)
            .with_pruning(true)
            .with_caps(caps);
        let v = par_trials(3030, 100, |f| Ok(run_trial(&p, f, cfg.clone())?.verdict)).unwrap();
        SurvivalEstimate::from_verdicts(v, 0.95).unwrap()
    };
    let low = run(1.5);
    let high = run(6.0);
    let ok = low.survived > 0
        && low.survived_ci.lower > 0.02
        && high.survived_ci.upper < low.survived_ci.lower;
    report(
        "tree survival witness",
        ok,
        format!(
            "d=3 rho=0.1 depth 30: lambda=1.5 survived {} (capped {}), lambda=6 survived {} (capped {})",
            ci(&low.survived_ci),
            low.capped,
            ci(&high.survived_ci),
            high.capped
        ),
    );
}

#[test]
fn encapsulation_witness() {
    let enc = par_trials(6060, 200, |f| {
        Ok(origin_encapsulated(&closed_site_field(f, 60.0, 2, 40)?).is_encapsulated())
    })
    .unwrap();
    let enc = enc.iter().filter(|&&b| b).count() as u64;
    let params = SspParams::new(4001.0, RedClock::ExpCapped(1.0)).unwrap();
    let curve = estimate_red_survival(
        params,
        2,
        100,
        &[1e-4, 1e-3, 1e-2, 0.1, 0.3],
        200,
        6061,
        0.95,
        0.3,
    )
    .unwrap();
    let pts = &curve.points[..3];
    let mut monotone = true;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[i].survival.separated_from(&pts[j].survival) {
                monotone &= pts[j].survival.point < pts[i].survival.point;
            }
        }
    }
    let at_1e3 = &curve.points[1];
    let ok = enc as f64 >= 0.99 * 200.0 && at_1e3.survival.point >= 0.9 && monotone;
    let enc_ci = wilson_interval(enc, 200, 0.95).unwrap();
    let curve_txt = curve
        .points
        .iter()
        .map(|p| {
            format!(
                "p={} {} (origin seeds {})",
                p.p,
                ci(&p.survival),
                p.origin_seed
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    report(
        "encapsulation witness",
        ok,
        format!(
            "closed-site encapsulation rho=60 R=40: {}; red survival kappa=4001 R=100: {curve_txt}; c_hat={:.3} (se {:.3})",
            ci(&enc_ci),
            curve.c_hat,
            curve.c_hat_se
        ),
    );
}

#[test]
fn coupling_consistency() {
    let (checked, violations, skipped) =
        sample_inequality(2.0, 0.01, 0.01, 2, 10_000, 7070).unwrap();
    let zero = coupling_batch(12.0, 1e-9, 1e-9, 2, 10, 50, 7071).unwrap();
    let dynamic = coupling_batch(1.5, 0.02, 0.02, 2, 15, 50, 7072).unwrap();
    let ok = checked == 10_000
        && violations == 0
        && zero.zero_seed_trials > 0
        && zero.holds()
        && dynamic.holds();
    report(
        "coupling consistency",
        ok,
        format!(
            "inequality at {checked} non-seed sites, {violations} violations ({skipped} seeds skipped); zero-seed trials reaching boundary {}/{} of 50; in-trial spread checks {} sites, {} violations",
            zero.zero_seed_reached, zero.zero_seed_trials, dynamic.spread_checked, dynamic.spread_violations
        ),
    );
}

#[test]
fn chernoff_bounds() {
    let mut ok = true;
    let mut detail = String::new();
    for (i, (mu, eps, c)) in [
        (100.0f64, 0.1f64, 1.5f64),
        (50.0, 0.2, 2.0),
        (20.0, 0.3, 2.5),
    ]
    .into_iter()
    .enumerate()
    {
        let t = poisson_tail_check(mu, eps, c, 1_000_000, 8080 + i as u64).unwrap();
        let lower = (-mu * eps * eps / 2.0).exp();
        let upper = (-mu * eps * eps / 4.0).exp();
        let general = (-mu * (1.0 - c + c * c.ln())).exp();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.max(1e-300) + 1e-12;
        ok &= close(t.bounds.lower, lower) && close(t.bounds.upper, upper);
        ok &= t.bounds.general <= general * (1.0 + 1e-6) && t.bounds.general >= general * 0.999;
        ok &= t.lower_freq <= lower && t.upper_freq <= upper && t.general_freq <= general;
        detail += &format!(
            "mu={mu} eps={eps} C={c}: lower {:.2e}<={lower:.2e}, upper {:.2e}<={upper:.2e}, general {:.2e}<={general:.2e}; ",
            t.lower_freq, t.upper_freq, t.general_freq
        );
    }
    report("chernoff bounds", ok, detail);
}
