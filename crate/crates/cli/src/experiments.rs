//! The experiment table: parameters, output columns, validation and the
//! core call behind each experiment type.

use convfpp::bounds::poisson_tail_check;
use convfpp::engine::{run_trial, Caps, TrialConfig};
use convfpp::lattice_lab::{
    closed_site_density, estimate_extinction, origin_encapsulated, shape_estimate,
    truncated_clock_stats, ShapeConfig, SHAPE_DIRECTIONS,
};
use convfpp::model::{ClockMode, ModelParams};
use convfpp::ssp::{
    coupling_batch, estimate_red_survival, seed_density, RedClock, SeedSource, SspParams,
};
use convfpp::stats::{mean_estimate, wilson_interval, SurvivalEstimate, WilsonInterval};
use convfpp::tree_lab::{
    brw_stats, dstar_probability, estimate_highways, estimate_subbox_good_prob, gamma_star,
    good_box_probability, spine_probability, BrwMethod, GoodBoxConfig, DSTAR_K_GUARD,
    EXACT_DEPTH_GUARD, HIGHWAY_CAP_GUARD, HIGHWAY_R_GUARD, MIN_CLOUD_WIDTH, SPINE_K_GUARD,
    SUBBOX_K_GUARD,
};
use convfpp::trials::par_trials;

use crate::error::{invalid, HarnessResult};
use crate::schema::{col, ColType, Column, Value};

use ColType::{Bool, Float, Int, Text};

/// Largest lattice box a cell may allocate, in sites.
pub const MAX_BOX_SITES: f64 = 5.0e7;

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub name: &'static str,
    pub ty: ColType,
    /// `None` makes the parameter required.
    pub default: Option<&'static str>,
    /// Allowed values of a text parameter; empty means any.
    pub choices: &'static [&'static str],
    pub doc: &'static str,
}

const fn p(
    name: &'static str,
    ty: ColType,
    default: Option<&'static str>,
    doc: &'static str,
) -> Param {
    Param {
        name,
        ty,
        default,
        choices: &[],
        doc,
    }
}

const fn choice(
    name: &'static str,
    default: &'static str,
    choices: &'static [&'static str],
    doc: &'static str,
) -> Param {
    Param {
        name,
        ty: Text,
        default: Some(default),
        choices,
        doc,
    }
}

/// Everything a cell needs besides its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunCtx {
    pub trials: u64,
    pub seed: u64,
    pub caps: Caps,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub values: Vec<Value>,
    /// Trials stopped by a cap.
    pub capped: u64,
}

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [Param],
    pub outputs: &'static [Column],
    /// Whether `max_sites`, `max_events` and `horizon` apply.
    pub uses_caps: bool,
    pub check: fn(&Cell) -> HarnessResult<()>,
    pub run: fn(&Cell, &RunCtx) -> HarnessResult<Outputs>,
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment")
            .field("name", &self.name)
            .finish()
    }
}

/// One grid point: a value for every parameter of the experiment, in
/// declaration order.
#[derive(Debug, Clone)]
pub struct Cell {
    pub experiment: &'static Experiment,
    pub values: Vec<Value>,
}

impl Cell {
    /// Build a cell from raw strings, filling defaults and checking types
    /// and choices. Preconditions of the experiment are checked separately
    /// by [`Cell::validate`].
    pub fn from_strings(
        experiment: &'static Experiment,
        get: impl Fn(&str) -> Option<String>,
    ) -> HarnessResult<Cell> {
        let mut values = Vec::with_capacity(experiment.params.len());
        for prm in experiment.params {
            let raw = match (get(prm.name), prm.default) {
                (Some(v), _) => v,
                (None, Some(d)) => d.to_string(),
                (None, None) => {
                    return invalid(format!(
                        "{}: missing required parameter {}",
                        experiment.name, prm.name
                    ))
                }
            };
            let v = Value::parse(prm.ty, &raw).or_else(|_| {
                invalid(format!(
                    "{}: cannot read {raw:?} as {}",
                    prm.name,
                    prm.ty.name()
                ))
            })?;
            match &v {
                Value::Float(x) if x.is_nan() => return invalid(format!("{} is NaN", prm.name)),
                Value::Text(s) if !prm.choices.is_empty() && !prm.choices.contains(&s.as_str()) => {
                    return invalid(format!(
                        "{} must be one of {:?}, got {s:?}",
                        prm.name, prm.choices
                    ))
                }
                _ => {}
            }
            values.push(v);
        }
        Ok(Cell { experiment, values })
    }

    pub fn validate(&self) -> HarnessResult<()> {
        (self.experiment.check)(self)
    }

    fn value(&self, name: &str) -> &Value {
        let i = self
            .experiment
            .params
            .iter()
            .position(|p| p.name == name)
            .unwrap_or_else(|| panic!("{} has no parameter {name}", self.experiment.name));
        &self.values[i]
    }

    pub fn f64(&self, name: &str) -> f64 {
        match self.value(name) {
            Value::Float(x) => *x,
            other => panic!("{name} is not a float: {other:?}"),
        }
    }

    pub fn u64(&self, name: &str) -> u64 {
        match self.value(name) {
            Value::Int(i) => *i,
            other => panic!("{name} is not an integer: {other:?}"),
        }
    }

    pub fn usize(&self, name: &str) -> usize {
        self.u64(name) as usize
    }

    /// Integer parameter that must fit in `u32`; checked by validation.
    pub fn u32(&self, name: &str) -> u32 {
        self.u64(name).min(u32::MAX as u64) as u32
    }

    pub fn text(&self, name: &str) -> &str {
        match self.value(name) {
            Value::Text(s) => s,
            other => panic!("{name} is not text: {other:?}"),
        }
    }
}

pub fn find(name: &str) -> HarnessResult<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<_> = EXPERIMENTS.iter().map(|e| e.name).collect();
        crate::error::HarnessError::Validation(format!(
            "unknown experiment {name:?}; known: {}",
            names.join(", ")
        ))
    })
}

fn wilson_values(w: &WilsonInterval) -> [Value; 3] {
    [w.point.into(), w.lower.into(), w.upper.into()]
}

fn plain(values: Vec<Value>) -> HarnessResult<Outputs> {
    Ok(Outputs { values, capped: 0 })
}

fn check_box(d: usize, radius: u32) -> HarnessResult<()> {
    if radius == 0 {
        return invalid("radius must be positive");
    }
    if (2.0 * radius as f64 + 1.0).powi(d as i32) > MAX_BOX_SITES {
        return invalid(format!(
            "box of radius {radius} in dimension {d} exceeds {MAX_BOX_SITES} sites"
        ));
    }
    Ok(())
}

fn check_u32(cell: &Cell, name: &str) -> HarnessResult<()> {
    if cell.u64(name) > u32::MAX as u64 {
        return invalid(format!("{name} is too large"));
    }
    Ok(())
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> HarnessResult<()> {
    if !(v > lo && v < hi) {
        return invalid(format!("{name} must lie in ({lo}, {hi}), got {v}"));
    }
    Ok(())
}

fn check_k(k: usize, guard: usize) -> HarnessResult<()> {
    if k == 0 || k > guard {
        return invalid(format!("k must lie in 1..={guard}, got {k}"));
    }
    Ok(())
}

fn tree_params(cell: &Cell) -> HarnessResult<ModelParams> {
    Ok(ModelParams::tree(cell.usize("d"), cell.f64("lambda"), 0.0)?)
}

// ---- extinction ----

fn extinction_params(cell: &Cell) -> HarnessResult<ModelParams> {
    let (d, lambda, rho) = (cell.usize("d"), cell.f64("lambda"), cell.f64("rho"));
    let mode = match cell.text("mode") {
        "resample" => ClockMode::Resample,
        _ => ClockMode::Static,
    };
    let p = match cell.text("topology") {
        "tree" => ModelParams::tree(d, lambda, rho)?,
        _ => ModelParams::lattice(d, lambda, rho)?,
    };
    Ok(p.with_mode(mode)?)
}

fn extinction_check(cell: &Cell) -> HarnessResult<()> {
    let p = extinction_params(cell)?;
    check_u32(cell, "radius")?;
    if cell.text("topology") == "lattice" {
        check_box(p.d, cell.u32("radius"))?;
    } else if cell.u32("radius") == 0 {
        return invalid("radius must be positive");
    }
    Ok(())
}

fn extinction_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let params = extinction_params(cell)?;
    let radius = cell.u32("radius");
    let est = if cell.text("topology") == "lattice" {
        estimate_extinction(
            &params,
            radius,
            ctx.trials,
            ctx.caps,
            ctx.seed,
            ctx.confidence,
        )?
    } else {
        let cfg = TrialConfig::to_target(radius)
            .with_caps(ctx.caps)
            .with_pruning(cell.text("prune") == "on");
        let verdicts = par_trials(ctx.seed, ctx.trials, |f| {
            Ok(run_trial(&params, f, cfg.clone())?.verdict)
        })?;
        SurvivalEstimate::from_verdicts(verdicts, ctx.confidence)?
    };
    let mut v: Vec<Value> = vec![
        est.survived.into(),
        est.extinct.into(),
        est.exhausted.into(),
    ];
    v.extend(wilson_values(&est.survived_ci));
    v.extend(wilson_values(&est.extinct_ci));
    v.extend(wilson_values(&est.capped_ci));
    Ok(Outputs {
        values: v,
        capped: est.capped,
    })
}

const EXTINCTION: Experiment = Experiment {
    name: "extinction",
    about: "Type-1 survival to a target depth or radius",
    params: &[
        choice(
            "topology",
            "lattice",
            &["lattice", "tree"],
            "lattice or tree",
        ),
        p("d", Int, Some("2"), "lattice dimension or tree degree"),
        p("lambda", Float, None, "type-2 rate"),
        p("rho", Float, None, "conversion rate"),
        p(
            "radius",
            Int,
            Some("30"),
            "target depth (tree) or sup-norm radius (lattice)",
        ),
        choice(
            "mode",
            "static",
            &["static", "resample"],
            "type-2 clock construction; resample is lattice only",
        ),
        choice(
            "prune",
            "on",
            &["on", "off"],
            "skip type 2 inside dead tree subtrees",
        ),
    ],
    outputs: &[
        col("survived", Int, "trials reaching the target"),
        col("extinct", Int, "trials where type 1 died out"),
        col("exhausted", Int, "trials ending with nothing left to do"),
        col("survival", Float, "survived / trials"),
        col("survival_lo", Float, "Wilson lower bound"),
        col("survival_hi", Float, "Wilson upper bound"),
        col("extinction", Float, "extinct / trials"),
        col("extinction_lo", Float, "Wilson lower bound"),
        col("extinction_hi", Float, "Wilson upper bound"),
        col("capped_frac", Float, "capped / trials"),
        col("capped_lo", Float, "Wilson lower bound"),
        col("capped_hi", Float, "Wilson upper bound"),
    ],
    uses_caps: true,
    check: extinction_check,
    run: extinction_run,
};

// ---- brw ----

fn brw_method(cell: &Cell) -> BrwMethod {
    match cell.text("method") {
        "exact" => BrwMethod::ExactPrunedDfs,
        _ => BrwMethod::TruncatedCloud {
            width: cell.usize("width"),
        },
    }
}

fn brw_check(cell: &Cell) -> HarnessResult<()> {
    ModelParams::tree(cell.usize("d"), 1.0, 0.0)?;
    let n = cell.usize("n");
    if n == 0 {
        return invalid("n must be positive");
    }
    match brw_method(cell) {
        BrwMethod::ExactPrunedDfs if n > EXACT_DEPTH_GUARD => invalid(format!(
            "exact minima are limited to n <= {EXACT_DEPTH_GUARD}"
        )),
        BrwMethod::TruncatedCloud { width } if width < MIN_CLOUD_WIDTH => {
            invalid(format!("width must be at least {MIN_CLOUD_WIDTH}"))
        }
        _ => Ok(()),
    }
}

fn brw_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let d = cell.usize("d");
    let s = brw_stats(d, cell.usize("n"), brw_method(cell), ctx.trials, ctx.seed)?;
    plain(vec![
        s.mean_mn.into(),
        s.sd_mn.into(),
        s.se_mn.into(),
        s.ratio.into(),
        gamma_star(d)?.into(),
    ])
}

const BRW: Experiment = Experiment {
    name: "brw",
    about: "Minimal type-1 passage time M_n to depth n",
    params: &[
        p("d", Int, Some("3"), "tree degree"),
        p("n", Int, Some("10"), "depth"),
        choice(
            "method",
            "exact",
            &["exact", "cloud"],
            "pruned search or truncated particle cloud",
        ),
        p("width", Int, Some("100000"), "cloud width"),
    ],
    outputs: &[
        col("mean_mn", Float, "mean of M_n"),
        col("sd_mn", Float, "standard deviation of M_n"),
        col("se_mn", Float, "standard error of the mean"),
        col("ratio", Float, "mean_mn / n"),
        col("gamma_star", Float, "limit of M_n / n"),
    ],
    uses_caps: false,
    check: brw_check,
    run: brw_run,
};

// ---- subbox ----

fn subbox_check(cell: &Cell) -> HarnessResult<()> {
    tree_params(cell)?;
    check_range("epsilon", cell.f64("epsilon"), 0.0, 1.0)?;
    check_k(cell.usize("k"), SUBBOX_K_GUARD)
}

fn subbox_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let r = estimate_subbox_good_prob(
        cell.usize("k"),
        cell.f64("epsilon"),
        cell.f64("lambda"),
        cell.usize("d"),
        ctx.trials,
        ctx.seed,
        cell.usize("h1_cap"),
        ctx.confidence,
    )?;
    let mut v = wilson_values(&r.good).to_vec();
    v.push(r.mean_h1_capped.into());
    plain(v)
}

const SUBBOX: Experiment = Experiment {
    name: "subbox",
    about: "Probability that a sub-box of depth k is good",
    params: &[
        p("d", Int, Some("3"), "tree degree"),
        p("k", Int, Some("8"), "sub-box depth"),
        p("epsilon", Float, Some("0.1"), "slack"),
        p("lambda", Float, Some("1"), "type-2 rate"),
        p(
            "h1_cap",
            Int,
            Some("0"),
            "also count fast type-1 leaves up to this many",
        ),
    ],
    outputs: &[
        col("good", Float, "fraction of good sub-boxes"),
        col("good_lo", Float, "Wilson lower bound"),
        col("good_hi", Float, "Wilson upper bound"),
        col("mean_h1_capped", Float, "mean of min(|H1|, h1_cap)"),
    ],
    uses_caps: false,
    check: subbox_check,
    run: subbox_run,
};

// ---- highway ----

fn highway_check(cell: &Cell) -> HarnessResult<()> {
    subbox_check(cell)?;
    let (r, cap) = (cell.usize("r"), cell.usize("offspring_cap"));
    if r > HIGHWAY_R_GUARD {
        return invalid(format!("r must be at most {HIGHWAY_R_GUARD}"));
    }
    if cap == 0 || cap > HIGHWAY_CAP_GUARD {
        return invalid(format!("offspring_cap must lie in 1..={HIGHWAY_CAP_GUARD}"));
    }
    if !(cell.f64("alpha") > 0.0) {
        return invalid("alpha must be positive");
    }
    Ok(())
}

fn highway_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let h = estimate_highways(
        cell.usize("k"),
        cell.f64("epsilon"),
        cell.f64("lambda"),
        cell.usize("d"),
        cell.usize("r"),
        cell.usize("offspring_cap"),
        cell.f64("alpha"),
        ctx.trials,
        ctx.seed,
        ctx.confidence,
    )?;
    let mut v: Vec<Value> = vec![h.mean_count.into(), h.se_count.into()];
    v.extend(wilson_values(&h.above_alpha));
    plain(v)
}

const HIGHWAY: Experiment = Experiment {
    name: "highway",
    about: "Highway endpoints after r levels of sub-boxes",
    params: &[
        p("d", Int, Some("3"), "tree degree"),
        p("k", Int, Some("8"), "sub-box depth"),
        p("epsilon", Float, Some("0.1"), "slack"),
        p("lambda", Float, Some("1"), "type-2 rate"),
        p("r", Int, Some("3"), "levels"),
        p(
            "offspring_cap",
            Int,
            Some("2"),
            "witnesses followed per good sub-box",
        ),
        p(
            "alpha",
            Float,
            Some("1.5"),
            "growth threshold: count > alpha^r",
        ),
    ],
    outputs: &[
        col("mean_count", Float, "mean endpoint count"),
        col("se_count", Float, "standard error"),
        col(
            "above_alpha",
            Float,
            "fraction with more than alpha^r endpoints",
        ),
        col("above_alpha_lo", Float, "Wilson lower bound"),
        col("above_alpha_hi", Float, "Wilson upper bound"),
    ],
    uses_caps: false,
    check: highway_check,
    run: highway_run,
};

// ---- spine ----

fn spine_check(cell: &Cell) -> HarnessResult<()> {
    tree_params(cell)?;
    check_range("epsilon", cell.f64("epsilon"), 0.0, 1.0)?;
    check_k(cell.usize("k"), SPINE_K_GUARD)
}

fn spine_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let s = spine_probability(
        cell.usize("k"),
        cell.f64("epsilon"),
        cell.f64("lambda"),
        cell.usize("d"),
        ctx.trials,
        ctx.seed,
        ctx.confidence,
    )?;
    let mut v = wilson_values(&s.p_type1).to_vec();
    v.extend([
        s.edge_count.into(),
        s.log_p_type2.into(),
        s.p_type2.into(),
        s.log_p_spine.into(),
        s.p_spine.into(),
    ]);
    plain(v)
}

const SPINE: Experiment = Experiment {
    name: "spine",
    about: "Probability that a highway endpoint carries a spine",
    params: &[
        p("d", Int, Some("3"), "tree degree"),
        p("k", Int, Some("3"), "sub-box depth"),
        p("epsilon", Float, Some("0.1"), "slack"),
        p("lambda", Float, Some("1"), "type-2 rate"),
    ],
    outputs: &[
        col("p_type1", Float, "fraction with a fast type-1 spine"),
        col("p_type1_lo", Float, "Wilson lower bound"),
        col("p_type1_hi", Float, "Wilson upper bound"),
        col("edge_count", Int, "edges whose type-2 clocks must be slow"),
        col("log_p_type2", Float, "log of the type-2 factor"),
        col("p_type2", Float, "type-2 factor"),
        col("log_p_spine", Float, "log of the product"),
        col("p_spine", Float, "product of both factors"),
    ],
    uses_caps: false,
    check: spine_check,
    run: spine_run,
};

// ---- dstar ----

fn dstar_check(cell: &Cell) -> HarnessResult<()> {
    tree_params(cell)?;
    check_k(cell.usize("k"), DSTAR_K_GUARD)
}

fn dstar_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let w = dstar_probability(
        cell.usize("k"),
        cell.f64("lambda"),
        cell.usize("d"),
        ctx.trials,
        ctx.seed,
        ctx.confidence,
    )?;
    plain(wilson_values(&w).to_vec())
}

const DSTAR: Experiment = Experiment {
    name: "dstar",
    about: "Probability that every upward type-2 path of length k^2 is slow",
    params: &[
        p("d", Int, Some("3"), "tree degree"),
        p("k", Int, Some("2"), "backtrack scale"),
        p("lambda", Float, Some("1"), "type-2 rate"),
    ],
    outputs: &[
        col("p", Float, "fraction of trials where the event holds"),
        col("p_lo", Float, "Wilson lower bound"),
        col("p_hi", Float, "Wilson upper bound"),
    ],
    uses_caps: false,
    check: dstar_check,
    run: dstar_run,
};

// ---- goodbox ----

fn goodbox_config(cell: &Cell, ctx: &RunCtx) -> GoodBoxConfig {
    GoodBoxConfig {
        d: cell.usize("d"),
        k: cell.usize("k"),
        r: cell.usize("r"),
        epsilon: cell.f64("epsilon"),
        alpha: cell.f64("alpha"),
        lambda: cell.f64("lambda"),
        rho: cell.f64("rho"),
        offspring_cap: cell.usize("offspring_cap"),
        trials: ctx.trials,
        seed: ctx.seed,
        confidence: ctx.confidence,
    }
}

fn goodbox_check(cell: &Cell) -> HarnessResult<()> {
    highway_check(cell)?;
    check_k(cell.usize("k"), SPINE_K_GUARD.min(DSTAR_K_GUARD))?;
    check_range("alpha", cell.f64("alpha"), 1.0, 2.0)?;
    let rho = cell.f64("rho");
    if !(rho >= 0.0 && rho.is_finite()) {
        return invalid("rho must be nonnegative and finite");
    }
    Ok(())
}

fn goodbox_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let g = good_box_probability(goodbox_config(cell, ctx))?;
    let mut v = wilson_values(&g.g1).to_vec();
    v.extend([g.log_g2_given_g1.into(), g.g2_given_g1.into()]);
    v.extend(wilson_values(&g.g3));
    v.extend([
        g.g3_composed.into(),
        g.log_g4.into(),
        g.g4.into(),
        g.box_size.into(),
        g.log_product.into(),
        g.product.into(),
    ]);
    plain(v)
}

const GOODBOX: Experiment = Experiment {
    name: "goodbox",
    about: "Factors of the good-box probability",
    params: &[
        p("d", Int, Some("3"), "tree degree"),
        p("k", Int, Some("2"), "sub-box depth"),
        p("r", Int, Some("2"), "levels"),
        p("epsilon", Float, Some("0.1"), "slack"),
        p("alpha", Float, Some("1.5"), "growth threshold in (1, 2)"),
        p("lambda", Float, Some("1"), "type-2 rate"),
        p("rho", Float, Some("0.001"), "conversion rate"),
        p(
            "offspring_cap",
            Int,
            Some("2"),
            "witnesses followed per good sub-box",
        ),
    ],
    outputs: &[
        col("g1", Float, "highway growth probability"),
        col("g1_lo", Float, "Wilson lower bound"),
        col("g1_hi", Float, "Wilson upper bound"),
        col(
            "log_g2_given_g1",
            Float,
            "log probability of two spines given growth",
        ),
        col(
            "g2_given_g1",
            Float,
            "probability of two spines given growth",
        ),
        col("g3", Float, "no-backtrack probability along highways"),
        col("g3_lo", Float, "Wilson lower bound"),
        col("g3_hi", Float, "Wilson upper bound"),
        col(
            "g3_composed",
            Float,
            "single-site backtrack probability composed over the highway",
        ),
        col(
            "log_g4",
            Float,
            "log probability of no conversion in the box",
        ),
        col("g4", Float, "probability of no conversion in the box"),
        col("box_size", Float, "sites in the box"),
        col("log_product", Float, "log of the product of the factors"),
        col("product", Float, "product of the factors"),
    ],
    uses_caps: false,
    check: goodbox_check,
    run: goodbox_run,
};

// ---- shape ----

const SHAPE_DIRS: [&str; SHAPE_DIRECTIONS] = [
    "mu_00", "mu_01", "mu_02", "mu_03", "mu_04", "mu_05", "mu_06", "mu_07", "mu_08", "mu_09",
    "mu_10", "mu_11", "mu_12", "mu_13", "mu_14", "mu_15",
];

const SHAPE_OUTPUTS: [Column; 6 + SHAPE_DIRECTIONS] = {
    let mut out = [col("", Float, ""); 6 + SHAPE_DIRECTIONS];
    out[0] = col("box_radius_used", Int, "box radius of the run");
    out[1] = col("axis", Float, "time constant along the first axis at 2t");
    out[2] = col(
        "diagonal",
        Float,
        "time constant along the (1,1) diagonal at 2t",
    );
    out[3] = col(
        "hausdorff_drift",
        Float,
        "largest change of the rescaled shape between t and 2t",
    );
    out[4] = col(
        "max_concavity",
        Float,
        "largest dent of the rescaled shape below its hull",
    );
    out[5] = col("convex", Bool, "dent within the lattice resolution");
    let mut j = 0;
    while j < SHAPE_DIRECTIONS {
        out[6 + j] = col(
            SHAPE_DIRS[j],
            Float,
            "time constant at angle 2 pi j / 16 in the first coordinate plane, at 2t",
        );
        j += 1;
    }
    out
};

fn shape_config(cell: &Cell, ctx: &RunCtx) -> ShapeConfig {
    let mut cfg = ShapeConfig::new(cell.usize("d"), cell.f64("t"), ctx.trials, ctx.seed);
    cfg.rate = cell.f64("rate");
    cfg.box_radius = match cell.u32("box_radius") {
        0 => None,
        r => Some(r),
    };
    cfg
}

fn shape_check(cell: &Cell) -> HarnessResult<()> {
    let d = cell.usize("d");
    if !(2..=8).contains(&d) {
        return invalid("shape needs 2 <= d <= 8");
    }
    let (t, rate) = (cell.f64("t"), cell.f64("rate"));
    if !(t > 0.0 && t.is_finite() && rate > 0.0 && rate.is_finite()) {
        return invalid("t and rate must be positive and finite");
    }
    check_u32(cell, "box_radius")?;
    let r = match cell.u32("box_radius") {
        0 => (2.0 * t * rate * 3.5).ceil() + 6.0,
        r => r as f64,
    };
    if r > u32::MAX as f64 {
        return invalid("box radius too large");
    }
    check_box(d, r as u32)
}

fn shape_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let s = shape_estimate(shape_config(cell, ctx))?;
    let mut v: Vec<Value> = vec![
        (s.box_radius as u64).into(),
        s.axis().into(),
        s.diagonal().into(),
        s.hausdorff_drift.into(),
        s.max_concavity.into(),
        s.convex.into(),
    ];
    v.extend(s.time_constants_2t.iter().map(|&x| Value::from(x)));
    plain(v)
}

const SHAPE: Experiment = Experiment {
    name: "shape",
    about: "Limit shape of first passage growth in the first coordinate plane",
    params: &[
        p("d", Int, Some("2"), "lattice dimension"),
        p("t", Float, Some("30"), "shapes are read at t and 2t"),
        p(
            "rate",
            Float,
            Some("1"),
            "clock rate; 1 grows type 1, other values grow pure type 2",
        ),
        p(
            "box_radius",
            Int,
            Some("0"),
            "box radius; 0 picks one containing the 2t shape",
        ),
    ],
    outputs: &SHAPE_OUTPUTS,
    uses_caps: false,
    check: shape_check,
    run: shape_run,
};

// ---- closed ----

fn closed_check(cell: &Cell) -> HarnessResult<()> {
    let d = cell.usize("d");
    ModelParams::lattice(d, 1.0, cell.f64("rho"))?;
    check_u32(cell, "radius")?;
    check_box(d, cell.u32("radius"))
}

fn closed_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let (rho, d, radius) = (cell.f64("rho"), cell.usize("d"), cell.u32("radius"));
    let per = par_trials(ctx.seed, ctx.trials, |f| {
        let (field, dens) = closed_site_density(rho, d, radius, f)?;
        Ok((dens, origin_encapsulated(&field).is_encapsulated()))
    })?;
    let sites: u64 = per.iter().map(|(c, _)| c.sites).sum();
    let closed: u64 = per.iter().map(|(c, _)| c.closed).sum();
    let density = closed as f64 / sites as f64;
    let corr: Vec<f64> = per.iter().map(|(c, _)| c.pair_correlation).collect();
    let enc = per.iter().filter(|(_, e)| *e).count() as u64;
    let mut v: Vec<Value> = vec![
        sites.into(),
        closed.into(),
        density.into(),
        (density * (1.0 - density) / sites as f64).sqrt().into(),
        per[0].0.marginal.into(),
        mean_estimate(&corr).mean.into(),
    ];
    v.extend(wilson_values(&wilson_interval(
        enc,
        ctx.trials,
        ctx.confidence,
    )?));
    plain(v)
}

const CLOSED: Experiment = Experiment {
    name: "closed",
    about: "Closed-site density and encapsulation of the origin",
    params: &[
        p("d", Int, Some("2"), "lattice dimension"),
        p("rho", Float, None, "conversion rate"),
        p("radius", Int, Some("30"), "box radius"),
    ],
    outputs: &[
        col("sites", Int, "even sites counted, over all trials"),
        col("closed_sites", Int, "closed even sites"),
        col("density", Float, "closed_sites / sites"),
        col("se", Float, "binomial standard error"),
        col("marginal", Float, "rho / (rho + 2d)"),
        col(
            "pair_correlation",
            Float,
            "mean correlation of sites two apart on the first axis",
        ),
        col(
            "encapsulated",
            Float,
            "fraction of trials with the origin enclosed by closed sites",
        ),
        col("encapsulated_lo", Float, "Wilson lower bound"),
        col("encapsulated_hi", Float, "Wilson upper bound"),
    ],
    uses_caps: false,
    check: closed_check,
    run: closed_run,
};

// ---- ssp ----

fn ssp_params(cell: &Cell) -> HarnessResult<SspParams> {
    let red = match cell.text("red") {
        "unit" => RedClock::Unit,
        _ => RedClock::ExpCapped(cell.f64("cap")),
    };
    Ok(SspParams::new(cell.f64("kappa"), red)?)
}

fn ssp_check(cell: &Cell) -> HarnessResult<()> {
    ssp_params(cell)?;
    let (d, radius) = (cell.usize("d"), cell.u32("radius"));
    check_u32(cell, "radius")?;
    if !(1..=8).contains(&d) {
        return invalid("lattice dimension must lie in 1..=8");
    }
    if radius < 2 {
        return invalid("radius must be at least 2");
    }
    check_box(d, radius)?;
    SeedSource::Bernoulli { p: cell.f64("p") }.validate()?;
    Ok(())
}

fn ssp_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let p = cell.f64("p");
    let curve = estimate_red_survival(
        ssp_params(cell)?,
        cell.usize("d"),
        cell.u32("radius"),
        &[p],
        ctx.trials,
        ctx.seed,
        ctx.confidence,
        p,
    )?;
    let pt = &curve.points[0];
    let mut v: Vec<Value> = vec![
        pt.origin_seed.into(),
        pt.red_survived.into(),
        pt.blue_escaped.into(),
    ];
    v.extend(wilson_values(&pt.survival));
    plain(v)
}

const SSP: Experiment = Experiment {
    name: "ssp",
    about: "Red survival against Bernoulli seeds in the red/blue competition",
    params: &[
        p("d", Int, Some("2"), "lattice dimension"),
        p("radius", Int, Some("30"), "box radius"),
        p("p", Float, None, "seed probability"),
        p("kappa", Float, Some("4"), "blue passage time per edge"),
        choice(
            "red",
            "capped",
            &["capped", "unit"],
            "red clock: min(t1, cap) or 1",
        ),
        p("cap", Float, Some("2"), "cap on the red clock"),
    ],
    outputs: &[
        col(
            "origin_seed",
            Int,
            "trials whose origin was a seed; excluded from survival",
        ),
        col(
            "red_survived",
            Int,
            "red reached the boundary and no blue cluster crossed",
        ),
        col(
            "blue_escaped",
            Int,
            "blue joined the inner half box to the boundary",
        ),
        col("survival", Float, "red_survived / (trials - origin_seed)"),
        col("survival_lo", Float, "Wilson lower bound"),
        col("survival_hi", Float, "Wilson upper bound"),
    ],
    uses_caps: false,
    check: ssp_check,
    run: ssp_run,
};

// ---- seeds ----

fn seed_source(cell: &Cell) -> SeedSource {
    match cell.text("source") {
        "bernoulli" => SeedSource::Bernoulli { p: cell.f64("p") },
        _ => SeedSource::Coupled {
            c: cell.f64("c"),
            lambda: cell.f64("lambda"),
            rho: cell.f64("rho"),
        },
    }
}

fn seeds_check(cell: &Cell) -> HarnessResult<()> {
    seed_source(cell).validate()?;
    let d = cell.usize("d");
    if !(1..=8).contains(&d) {
        return invalid("lattice dimension must lie in 1..=8");
    }
    check_u32(cell, "radius")?;
    check_box(d, cell.u32("radius"))
}

fn seeds_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let (src, d, radius) = (seed_source(cell), cell.usize("d"), cell.u32("radius"));
    let per = par_trials(ctx.seed, ctx.trials, |f| {
        let (field, dens) = seed_density(src, d, radius, f)?;
        Ok((dens, field.cluster_count() as f64))
    })?;
    let sites: u64 = per.iter().map(|(s, _)| s.sites).sum();
    let seeds: u64 = per.iter().map(|(s, _)| s.seeds).sum();
    let expected = per[0].0.expected;
    let density = seeds as f64 / sites as f64;
    let se = (expected * (1.0 - expected) / sites as f64).sqrt();
    let corr: Vec<f64> = per.iter().map(|(s, _)| s.pair_correlation).collect();
    let clusters: Vec<f64> = per.iter().map(|(_, c)| *c).collect();
    plain(vec![
        sites.into(),
        seeds.into(),
        density.into(),
        se.into(),
        expected.into(),
        ((density - expected) / se).into(),
        mean_estimate(&corr).mean.into(),
        mean_estimate(&clusters).mean.into(),
    ])
}

const SEEDS: Experiment = Experiment {
    name: "seeds",
    about: "Seed density against its closed form",
    params: &[
        choice("source", "coupled", &["coupled", "bernoulli"], "seed rule"),
        p("d", Int, Some("2"), "lattice dimension"),
        p("radius", Int, Some("60"), "box radius"),
        p("p", Float, Some("0.01"), "Bernoulli seed probability"),
        p("c", Float, Some("2"), "coupling cutoff C"),
        p("lambda", Float, Some("0.01"), "type-2 rate"),
        p("rho", Float, Some("0.01"), "conversion rate"),
    ],
    outputs: &[
        col("sites", Int, "checkerboard sites counted, over all trials"),
        col("seeds", Int, "seeds among them"),
        col("density", Float, "seeds / sites"),
        col("se", Float, "standard error under the expected density"),
        col("expected", Float, "closed-form seed density"),
        col("z_score", Float, "(density - expected) / se"),
        col(
            "pair_correlation",
            Float,
            "mean correlation of sites two apart on the first axis",
        ),
        col(
            "mean_clusters",
            Float,
            "mean number of seed clusters per box",
        ),
    ],
    uses_caps: false,
    check: seeds_check,
    run: seeds_run,
};

// ---- bounds ----

fn bounds_check(cell: &Cell) -> HarnessResult<()> {
    convfpp::bounds::poisson_chernoff_bounds(cell.f64("mu"), cell.f64("epsilon"), cell.f64("c"))?;
    Ok(())
}

fn bounds_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let t = poisson_tail_check(
        cell.f64("mu"),
        cell.f64("epsilon"),
        cell.f64("c"),
        ctx.trials,
        ctx.seed,
    )?;
    plain(vec![
        t.bounds.lower.into(),
        t.bounds.upper.into(),
        t.bounds.general.into(),
        t.bounds.theta.into(),
        t.lower_freq.into(),
        t.upper_freq.into(),
        t.general_freq.into(),
        t.holds().into(),
    ])
}

const BOUNDS: Experiment = Experiment {
    name: "bounds",
    about: "Poisson Chernoff bounds against sampled tails; trials counts samples",
    params: &[
        p("mu", Float, Some("100"), "Poisson mean"),
        p(
            "epsilon",
            Float,
            Some("0.1"),
            "relative deviation in (0, 1)",
        ),
        p(
            "c",
            Float,
            Some("1.5"),
            "multiple of the mean for the general bound",
        ),
    ],
    outputs: &[
        col("lower", Float, "bound on P(P < (1 - eps) mu)"),
        col("upper", Float, "bound on P(P > (1 + eps) mu)"),
        col("general", Float, "bound on P(P > C mu)"),
        col("theta", Float, "minimising theta of the general bound"),
        col("lower_freq", Float, "sampled lower tail"),
        col("upper_freq", Float, "sampled upper tail"),
        col("general_freq", Float, "sampled tail above C mu"),
        col("holds", Bool, "every sampled tail within its bound"),
    ],
    uses_caps: false,
    check: bounds_check,
    run: bounds_run,
};

// ---- truncated ----

fn truncated_check(cell: &Cell) -> HarnessResult<()> {
    ModelParams::lattice(2, 1.0, 0.0)?.with_truncation(cell.f64("cutoff"), cell.f64("q"))?;
    Ok(())
}

fn truncated_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let s = truncated_clock_stats(cell.f64("cutoff"), cell.f64("q"), ctx.trials, ctx.seed)?;
    let mut v = wilson_values(&s.infinite).to_vec();
    v.extend([
        s.expected_infinite.into(),
        s.max_cdf_excess.into(),
        s.tolerance.into(),
        s.dominated().into(),
    ]);
    plain(v)
}

const TRUNCATED: Experiment = Experiment {
    name: "truncated",
    about: "Truncated type-1 clocks; trials counts samples",
    params: &[
        p(
            "cutoff",
            Float,
            Some("3"),
            "clock values above this become infinite on semi-marked edges",
        ),
        p("q", Float, Some("0.5"), "semi-mark probability"),
    ],
    outputs: &[
        col("infinite", Float, "fraction of infinite clocks"),
        col("infinite_lo", Float, "Wilson lower bound"),
        col("infinite_hi", Float, "Wilson upper bound"),
        col("expected_infinite", Float, "q exp(-cutoff)"),
        col(
            "max_cdf_excess",
            Float,
            "largest excess of the empirical CDF over Exp(1)",
        ),
        col("tolerance", Float, "allowed excess"),
        col("dominated", Bool, "excess within tolerance"),
    ],
    uses_caps: false,
    check: truncated_check,
    run: truncated_run,
};

// ---- coupling ----

fn coupling_check(cell: &Cell) -> HarnessResult<()> {
    let c = cell.f64("c");
    if !(c >= 1.0 && c.is_finite()) {
        return invalid(format!("the coupling needs C >= 1, got {c}"));
    }
    seeds_check_coupled(cell)
}

fn seeds_check_coupled(cell: &Cell) -> HarnessResult<()> {
    SeedSource::Coupled {
        c: cell.f64("c"),
        lambda: cell.f64("lambda"),
        rho: cell.f64("rho"),
    }
    .validate()?;
    let d = cell.usize("d");
    if !(1..=8).contains(&d) {
        return invalid("lattice dimension must lie in 1..=8");
    }
    check_u32(cell, "radius")?;
    check_box(d, cell.u32("radius"))
}

fn coupling_run(cell: &Cell, ctx: &RunCtx) -> HarnessResult<Outputs> {
    let r = coupling_batch(
        cell.f64("c"),
        cell.f64("lambda"),
        cell.f64("rho"),
        cell.usize("d"),
        cell.u32("radius"),
        ctx.trials,
        ctx.seed,
    )?;
    plain(vec![
        r.sites_checked.into(),
        r.inequality_violations.into(),
        r.spread_checked.into(),
        r.spread_violations.into(),
        r.zero_seed_trials.into(),
        r.zero_seed_reached.into(),
        r.holds().into(),
    ])
}

const COUPLING: Experiment = Experiment {
    name: "coupling",
    about: "Consistency of the seed coupling with the dynamics",
    params: &[
        p("d", Int, Some("2"), "lattice dimension"),
        p("radius", Int, Some("20"), "box radius"),
        p("c", Float, Some("2"), "coupling cutoff C >= 1"),
        p("lambda", Float, Some("0.01"), "type-2 rate"),
        p("rho", Float, Some("0.01"), "conversion rate"),
    ],
    outputs: &[
        col(
            "sites_checked",
            Int,
            "non-seed sites whose clock inequality was checked",
        ),
        col("inequality_violations", Int, "non-seed sites failing it"),
        col(
            "spread_checked",
            Int,
            "non-seed type-1 sites whose spreading was checked",
        ),
        col(
            "spread_violations",
            Int,
            "sites where type 1 failed to spread as predicted",
        ),
        col("zero_seed_trials", Int, "trials without seeds"),
        col(
            "zero_seed_reached",
            Int,
            "of those, trials where type 1 reached the boundary",
        ),
        col(
            "holds",
            Bool,
            "no violations and every zero-seed trial reached the boundary",
        ),
    ],
    uses_caps: false,
    check: coupling_check,
    run: coupling_run,
};

pub static EXPERIMENTS: &[Experiment] = &[
    EXTINCTION, BRW, SUBBOX, HIGHWAY, SPINE, DSTAR, GOODBOX, SHAPE, CLOSED, SSP, SEEDS, BOUNDS,
    TRUNCATED, COUPLING,
];
