use super::*;
use crate::model::clock::ClockKey;
use crate::model::field::{ForcedField, RandomField};
use crate::model::site::{LatticeSite, TreeSite};

fn tree(labels: &[u8]) -> TreeSite {
    TreeSite::from_labels(3, labels.to_vec()).unwrap()
}

fn lat(c: &[i32]) -> LatticeSite {
    LatticeSite::new(c.to_vec())
}

fn tkey(kind: ClockKind, child: &[u8]) -> ClockKey {
    let c = tree(child);
    ClockKey::tree_edge(kind, &c, &c.parent().unwrap()).unwrap()
}

fn lkey(kind: ClockKind, a: &[i32], b: &[i32]) -> ClockKey {
    ClockKey::lattice_edge(kind, &lat(a), &lat(b)).unwrap()
}

fn conv(site: impl Into<SiteId>) -> ClockKey {
    ClockKey::conversion(&site.into())
}

fn drain<F: ClockSource>(w: &mut WorldState<'_, F>) -> Vec<Step> {
    let mut steps = Vec::new();
    while let Some(s) = w.process_next_event().unwrap() {
        steps.push(s);
    }
    steps
}

fn count(events: &[Event], kind: EventKind) -> usize {
    events.iter().filter(|e| e.kind == kind).count()
}

#[test]
fn initial_queue_tree() {
    let p = ModelParams::tree(3, 1.0, 1.0).unwrap();
    let f = RandomField::new(1, 0);
    let w = init_trial(&p, &f, TrialConfig::to_target(5)).unwrap();
    let q = w.pending_events();
    assert_eq!(count(&q, EventKind::Arrive1), 3);
    assert_eq!(count(&q, EventKind::Convert), 1);
    assert_eq!(q.len(), 4);
    assert!(q.windows(2).all(|p| p[0].time <= p[1].time));
}

#[test]
fn initial_queue_lattice() {
    let p = ModelParams::lattice(2, 1.0, 1.0).unwrap();
    let f = RandomField::new(1, 0);
    let w = init_trial(&p, &f, TrialConfig::to_target(5)).unwrap();
    let q = w.pending_events();
    assert_eq!(count(&q, EventKind::Arrive1), 4);
    assert_eq!(count(&q, EventKind::Convert), 1);
}

#[test]
fn zero_rho_schedules_no_conversion() {
    let p = ModelParams::tree(3, 1.0, 0.0).unwrap();
    let f = RandomField::new(1, 0);
    let w = init_trial(&p, &f, TrialConfig::to_target(5)).unwrap();
    let q = w.pending_events();
    assert_eq!(q.len(), 3);
    assert_eq!(count(&q, EventKind::Convert), 0);
}

#[test]
fn rejects_bad_caps_and_tube_on_lattice() {
    let p = ModelParams::lattice(2, 1.0, 1.0).unwrap();
    let f = RandomField::new(1, 0);
    let mut c = TrialConfig::to_target(5);
    c.caps.max_sites = 0;
    assert!(init_trial(&p, &f, c).is_err());
    let mut c = TrialConfig::to_target(5);
    c.frontier_tube = Some(3);
    assert!(init_trial(&p, &f, c).is_err());
    let c = TrialConfig::to_target(6).with_box(5);
    assert!(init_trial(&p, &f, c).is_err());
}

#[test]
fn target_zero_survives_at_time_zero() {
    for p in [
        ModelParams::tree(3, 1.0, 1.0).unwrap(),
        ModelParams::lattice(2, 1.0, 1.0).unwrap(),
    ] {
        let out = run_trial(&p, &RandomField::new(3, 3), TrialConfig::to_target(0)).unwrap();
        assert_eq!(out.verdict, Verdict::SurvivedToTarget);
        assert_eq!(out.stop_time, 0.0);
        assert_eq!(out.events_processed, 0);
    }
}

// Root converts at 1.0 and its type 2 reaches the type-1 child at 1.2.
fn arrive2_field() -> ForcedField<RandomField> {
    let mut f = ForcedField::new(RandomField::new(0, 0))
        .with_default(ClockKind::T1, 10.0)
        .with_default(ClockKind::Conv, 100.0)
        .with_default(ClockKind::Td, 0.2)
        .with_default(ClockKind::Tu, 100.0);
    f.set(tkey(ClockKind::T1, &[0]), 0.5)
        .set(tkey(ClockKind::T1, &[1]), 0.6)
        .set(tkey(ClockKind::Td, &[1]), 100.0)
        .set(conv(tree(&[])), 1.0);
    f
}

#[test]
fn arrive2_takes_over_type1_and_later_conversion_is_noop() {
    let p = ModelParams::tree(3, 1.0, 1.0).unwrap();
    let f = arrive2_field();
    let mut cfg = TrialConfig::bounded(2);
    cfg.caps.horizon = 150.0;
    let mut w = init_trial(&p, &f, cfg).unwrap();
    let steps = drain(&mut w);
    let c0 = SiteId::from(tree(&[0]));

    let take = steps
        .iter()
        .find(|s| s.event.kind == EventKind::Arrive2 && w.site_id(s.event.target) == c0)
        .unwrap();
    assert!((take.event.time - 1.2).abs() < 1e-12);
    assert_eq!(take.effect, Effect::Occupied2);

    let rec = w.record(&c0).unwrap();
    assert_eq!(rec.state, SiteState::Type2);
    assert_eq!(rec.tau1, Some(0.5));
    assert!((rec.tau2.unwrap() - 1.2).abs() < 1e-12);
    assert_eq!(rec.parent, Some(SiteId::from(tree(&[]))));
    assert_eq!(w.progenitor_of(&c0).unwrap(), SiteId::from(tree(&[])));

    let late = steps
        .iter()
        .find(|s| s.event.kind == EventKind::Convert && w.site_id(s.event.target) == c0)
        .unwrap();
    assert!((late.event.time - 100.5).abs() < 1e-9);
    assert_eq!(late.effect, Effect::Suppressed);
}

#[test]
fn arrive1_at_type2_is_suppressed() {
    let p = ModelParams::lattice(2, 1.0, 1.0).unwrap();
    let mut f = ForcedField::new(RandomField::new(0, 0))
        .with_default(ClockKind::T1, 50.0)
        .with_default(ClockKind::T2, 100.0)
        .with_default(ClockKind::Conv, 1000.0);
    f.set(lkey(ClockKind::T1, &[0, 0], &[1, 0]), 0.1)
        .set(conv(lat(&[1, 0])), 0.05)
        .set(lkey(ClockKind::T2, &[1, 0], &[1, 1]), 0.01)
        .set(lkey(ClockKind::T1, &[0, 0], &[0, 1]), 0.05)
        .set(lkey(ClockKind::T1, &[0, 1], &[1, 1]), 0.25);
    let mut cfg = TrialConfig::bounded(2);
    cfg.caps.horizon = 1.0;
    let mut w = init_trial(&p, &f, cfg).unwrap();
    let steps = drain(&mut w);
    let y = SiteId::from(lat(&[1, 1]));
    let hit = steps
        .iter()
        .find(|s| s.event.kind == EventKind::Arrive1 && w.site_id(s.event.target) == y)
        .unwrap();
    assert!((hit.event.time - 0.3).abs() < 1e-12);
    assert_eq!(hit.effect, Effect::Suppressed);
    let rec = w.record(&y).unwrap();
    assert_eq!(rec.state, SiteState::Type2);
    assert_eq!(rec.tau1, None);
    assert!((rec.tau2.unwrap() - 0.16).abs() < 1e-12);
}

#[test]
fn arrive1_from_converted_source_is_void() {
    // The root converts before its only fast clock rings.
    let p = ModelParams::tree(3, 1.0, 1.0).unwrap();
    let mut f = ForcedField::new(RandomField::new(0, 0))
        .with_default(ClockKind::T1, 1.0)
        .with_default(ClockKind::Td, 100.0);
    f.set(conv(tree(&[])), 0.5);
    let out = run_trial(&p, &f, TrialConfig::to_target(3)).unwrap();
    assert_eq!(out.verdict, Verdict::Extinct);
    assert_eq!(out.stop_time, 0.5);
    assert_eq!(out.conversions, 1);
}

#[test]
fn progenitor_chain_walks_back_to_conversion() {
    let p = ModelParams::lattice(1, 1.0, 1.0).unwrap();
    let mut f = ForcedField::new(RandomField::new(0, 0))
        .with_default(ClockKind::T1, 0.1)
        .with_default(ClockKind::T2, 0.01)
        .with_default(ClockKind::Conv, 100.0);
    f.set(conv(lat(&[5])), 1.0);
    let mut cfg = TrialConfig::bounded(10);
    cfg.caps.horizon = 1.545;
    let mut w = init_trial(&p, &f, cfg).unwrap();
    drain(&mut w);
    let chain = w.progenitor_path(&lat(&[1]).into()).unwrap();
    let want: Vec<SiteId> = (1..=5).map(|i| lat(&[i]).into()).collect();
    assert_eq!(chain, want);
    assert_eq!(
        w.progenitor_of(&lat(&[5]).into()).unwrap(),
        lat(&[5]).into()
    );
    assert_eq!(
        w.progenitor_of(&lat(&[1]).into()).unwrap(),
        lat(&[5]).into()
    );
    // Still type 1 at the horizon.
    assert!(matches!(
        w.progenitor_of(&lat(&[-9]).into()),
        Err(Error::Domain(_))
    ));
}

#[test]
fn resampled_attempt_replaces_stale_one() {
    let p = ModelParams::lattice(2, 1.0, 1.0).unwrap();
    let mut f = ForcedField::new(RandomField::new(0, 0))
        .with_default(ClockKind::T1, 50.0)
        .with_default(ClockKind::T2, 100.0)
        .with_default(ClockKind::T3, 100.0)
        .with_default(ClockKind::Conv, 1000.0);
    f.set(lkey(ClockKind::T1, &[0, 0], &[1, 0]), 0.01)
        .set(conv(lat(&[1, 0])), 0.04)
        .set(lkey(ClockKind::T1, &[0, 0], &[0, 1]), 0.1)
        .set(lkey(ClockKind::T1, &[0, 1], &[1, 1]), 0.1)
        .set(lkey(ClockKind::T2, &[1, 0], &[1, 1]), 10.0)
        .set(lkey(ClockKind::T3, &[1, 0], &[1, 1]), 0.3);
    let y = SiteId::from(lat(&[1, 1]));
    let x = SiteId::from(lat(&[1, 0]));
    for (mode, tau2) in [(ClockMode::Static, 10.05), (ClockMode::Resample, 0.5)] {
        let p = p.with_mode(mode).unwrap();
        let mut cfg = TrialConfig::bounded(2);
        cfg.caps.horizon = 20.0;
        let mut w = init_trial(&p, &f, cfg).unwrap();
        drain(&mut w);
        let rec = w.record(&y).unwrap();
        assert!((rec.tau1.unwrap() - 0.2).abs() < 1e-12);
        assert!((rec.tau2.unwrap() - tau2).abs() < 1e-9, "{mode:?}: {rec:?}");
        assert_eq!(rec.parent, Some(x.clone()));
    }
}

#[test]
fn zero_rho_tree_always_survives() {
    let p = ModelParams::tree(3, 2.0, 0.0).unwrap();
    for t in 0..10 {
        let out = run_trial(&p, &RandomField::new(9, t), TrialConfig::to_target(18)).unwrap();
        assert_eq!(out.verdict, Verdict::SurvivedToTarget);
        assert_eq!(out.conversions, 0);
        assert_eq!(out.max_radius, 18);
    }
}

#[test]
fn frontier_tube_reaches_deep_targets_and_is_labelled() {
    let p = ModelParams::tree(3, 2.0, 0.0).unwrap();
    let mut cfg = TrialConfig::to_target(50);
    cfg.frontier_tube = Some(4);
    let out = run_trial(&p, &RandomField::new(9, 1), cfg).unwrap();
    assert_eq!(out.verdict, Verdict::SurvivedToTarget);
    assert!(out.approximate);
}

#[test]
fn line_dies_out() {
    let p = ModelParams::lattice(1, 1.0, 1.0).unwrap();
    let extinct = (0..200)
        .filter(|&t| {
            let out = run_trial(&p, &RandomField::new(4, t), TrialConfig::to_target(100)).unwrap();
            out.verdict == Verdict::Extinct
        })
        .count();
    assert!(extinct >= 190, "{extinct}");
}

#[test]
fn caps_are_reported() {
    let p = ModelParams::tree(3, 1.0, 0.0).unwrap();
    let mut cfg = TrialConfig::to_target(60);
    cfg.caps.max_sites = 1000;
    let out = run_trial(&p, &RandomField::new(1, 1), cfg.clone()).unwrap();
    assert_eq!(out.verdict, Verdict::Capped);
    cfg.caps = Caps {
        horizon: 0.5,
        ..Caps::default()
    };
    let out = run_trial(&p, &RandomField::new(1, 1), cfg.clone()).unwrap();
    assert_eq!(out.verdict, Verdict::Capped);
    assert_eq!(out.stop_time, 0.5);
    cfg.caps = Caps {
        max_events: 10,
        ..Caps::default()
    };
    let out = run_trial(&p, &RandomField::new(1, 1), cfg).unwrap();
    assert_eq!(out.verdict, Verdict::Capped);
    assert_eq!(out.events_processed, 10);
}

fn check_records<F: ClockSource>(w: &WorldState<'_, F>, topo: crate::model::Topology) {
    let mut live = 0;
    for (site, rec) in w.occupied_sites() {
        if let (Some(a), Some(b)) = (rec.tau1, rec.tau2) {
            assert!(a < b, "{site}: {rec:?}");
        }
        assert_eq!(rec.state == SiteState::Type2, rec.tau2.is_some());
        if rec.state == SiteState::Type1 {
            live += 1;
        }
        let parent = rec.parent.clone().expect("occupied sites have a parent");
        if parent != site {
            assert!(topo.adjacent(&parent, &site));
            let pr = w.record(&parent).unwrap();
            match rec.state {
                SiteState::Type1 => assert!(pr.tau1.unwrap() < rec.tau1.unwrap()),
                SiteState::Type2 => assert!(pr.tau2.unwrap() < rec.tau2.unwrap()),
                SiteState::Vacant => unreachable!(),
            }
        }
        if rec.state == SiteState::Type2 {
            w.progenitor_of(&site).unwrap();
        }
    }
    assert_eq!(live, w.live_type1());
}

#[test]
fn records_stay_consistent() {
    for t in 0..20 {
        for mode in [ClockMode::Static, ClockMode::Resample] {
            let p = ModelParams::lattice(2, 1.3, 0.5)
                .unwrap()
                .with_mode(mode)
                .unwrap();
            let f = RandomField::new(77, t);
            let mut w = init_trial(&p, &f, TrialConfig::bounded(8)).unwrap();
            let mut last = 0.0;
            while let Some(s) = w.process_next_event().unwrap() {
                assert!(s.event.time >= last);
                last = s.event.time;
            }
            check_records(&w, crate::model::Topology::new(TopologyKind::Lattice, 2));
        }
        let p = ModelParams::tree(3, 1.5, 0.3).unwrap();
        let f = RandomField::new(78, t);
        let mut w = init_trial(&p, &f, TrialConfig::bounded(7)).unwrap();
        drain(&mut w);
        check_records(&w, crate::model::Topology::new(TopologyKind::Tree, 3));
    }
}

#[test]
fn pruning_leaves_type1_history_unchanged() {
    let p = ModelParams::tree(3, 1.5, 0.3).unwrap();
    for t in 0..30 {
        let f = RandomField::new(5, t);
        let a = run_trial(&p, &f, TrialConfig::to_target(12)).unwrap();
        let b = run_trial(&p, &f, TrialConfig::to_target(12).with_pruning(true)).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.stop_time.to_bits(), b.stop_time.to_bits());
        assert_eq!(a.max_radius, b.max_radius);
    }
}

#[test]
fn replay_is_bitwise_identical() {
    let p = ModelParams::lattice(2, 1.0, 1.0).unwrap();
    for t in 0..10 {
        let a = run_trial(&p, &RandomField::new(11, t), TrialConfig::to_target(10)).unwrap();
        let b = run_trial(&p, &RandomField::new(11, t), TrialConfig::to_target(10)).unwrap();
        assert!(a.same_bits(&b));
    }
}

#[test]
fn pure_type2_growth_runs_until_box_is_full() {
    let p = ModelParams::lattice(2, 2.0, 0.0).unwrap();
    let mut cfg = TrialConfig::bounded(5);
    cfg.initial = Initial::Type2;
    let f = RandomField::new(1, 2);
    let mut w = init_trial(&p, &f, cfg).unwrap();
    let out = w.run().unwrap();
    assert_eq!(out.verdict, Verdict::Exhausted);
    assert_eq!(w.occupied(), 121);
}
