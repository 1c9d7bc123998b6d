//! Subcommand implementations. Each returns a [`Table`] with a fixed header.

use dyner::analytic::{
    binomial_tail, c_epsilon, edge_separation, entropy_exponent, escape_probability,
    expected_hitting, expected_stationarity_time, fluid_time, graph_separation, gumbel_centred,
    gumbel_limit_cdf, rate_functions, stationarity_cdf, stationary_probability,
    transition_probability, EdgeState,
};
use dyner::components::{emergence_targets, sample_emergence, static_er_largest_component};
use dyner::simulate::{
    default_cap, estimate_hitting_renewal, replicate, sample_escape, sample_hitting_times,
    sample_stationarity_times, sample_time_above, simulate_trajectory, Passage,
};
use dyner::stats::{ks_distance, mean_ci};
use dyner::{derive, DerivedParams, LogNonNegative};

use crate::config::RunConfig;
use crate::output::{Cell, RecordKind, Table};
use crate::svg::{line_chart, Series};
use crate::{AnalyticCommand, CliError, Command, ComponentsCommand, Outcome, SimulateCommand};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn require<T: Clone>(value: &Option<T>, key: &str) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::Validation(format!("missing required parameter `{key}` (flag --{} or config key {key})", key.replace('_', "-"))))
}

fn as_count(x: f64, key: &str) -> Result<u64, CliError> {
    if x >= 0.0 && x.fract() == 0.0 && x < 9.0e15 {
        Ok(x as u64)
    } else {
        Err(CliError::Validation(format!("`{key}` must be a nonnegative integer edge count, got {x}")))
    }
}

fn model(cfg: &RunConfig) -> Result<DerivedParams, CliError> {
    let n = require(&cfg.n, "n")?;
    Ok(derive(n, cfg.alpha.unwrap_or(1.0), cfg.beta.unwrap_or(1.0))?)
}

fn replicas(cfg: &RunConfig, min: usize) -> Result<usize, CliError> {
    let r = require(&cfg.replicas, "replicas")?;
    if r < min {
        return Err(CliError::Validation(format!("`replicas` must be at least {min}, got {r}")));
    }
    Ok(r)
}

fn cap(cfg: &RunConfig, d: &DerivedParams) -> Result<f64, CliError> {
    match cfg.cap {
        Some(c) if c > 0.0 => Ok(c),
        Some(c) => Err(CliError::Validation(format!("`cap` must be positive, got {c}"))),
        None => Ok(default_cap(d)),
    }
}

fn seed(cfg: &RunConfig) -> (u64, &'static str) {
    match cfg.seed {
        Some(s) => (s, "given"),
        None => (rand::random(), "entropy"),
    }
}

fn header(table: &mut Table, command: &str, d: Option<&DerivedParams>) {
    table.meta("command", command).meta("version", VERSION);
    if let Some(d) = d {
        table.meta("n", d.n()).meta("alpha", d.alpha()).meta("beta", d.beta());
    }
}

fn lin(x: LogNonNegative) -> Cell {
    Cell::opt_float(x.to_linear())
}

pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let table = match command {
        Command::Analytic(c) => match c {
            AnalyticCommand::Transition(_) => transition(cfg)?,
            AnalyticCommand::Stationarity(_) => stationarity(cfg)?,
            AnalyticCommand::Hitting(_) => hitting(cfg)?,
            AnalyticCommand::Fluid(_) => fluid(cfg)?,
            AnalyticCommand::Entropy(_) => entropy(cfg)?,
            AnalyticCommand::Tail(_) => tail(cfg)?,
            AnalyticCommand::Rates(_) => rates(cfg)?,
        },
        Command::Simulate(c) => {
            return match c {
                SimulateCommand::Trajectory(_) => trajectory(cfg).map(done),
                SimulateCommand::Hitting(_) => sim_hitting(cfg),
                SimulateCommand::Stationarity(_) => sim_stationarity(cfg).map(done),
                SimulateCommand::Renewal(_) => renewal(cfg).map(done),
                SimulateCommand::Escape(_) => escape(cfg).map(done),
            }
        }
        Command::Components(c) => {
            return match c {
                ComponentsCommand::Emergence(_) => emergence(cfg),
                ComponentsCommand::Static(_) => static_graph(cfg).map(done),
            }
        }
    };
    Ok(done(table))
}

fn done(table: Table) -> Outcome {
    Outcome { table, failure: None }
}

fn value_table(command: &str, d: Option<&DerivedParams>, rows: Vec<(&str, Cell)>) -> Table {
    let mut t = Table::new(&["quantity", "value"]);
    header(&mut t, command, d);
    for (q, v) in rows {
        t.push(RecordKind::Value, vec![("quantity", q.into()), ("value", v)]);
    }
    t
}

pub fn transition(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let t = require(&cfg.t, "t")?;
    use EdgeState::{Absent, Present};
    let p = |a, b| transition_probability(a, b, t, &d);
    let mut table = value_table(
        "analytic transition",
        Some(&d),
        vec![
            ("p00", p(Absent, Absent)?.into()),
            ("p01", p(Absent, Present)?.into()),
            ("p10", p(Present, Absent)?.into()),
            ("p11", p(Present, Present)?.into()),
            ("stationary_present", stationary_probability(Present, &d).into()),
            ("edge_separation", edge_separation(t, &d)?.into()),
        ],
    );
    table.meta("t", t);
    Ok(table)
}

pub fn stationarity(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let mut rows = vec![
        ("pairs", d.pairs().into()),
        ("update_rate", d.update_rate().into()),
        ("expected_time", expected_stationarity_time(&d).into()),
    ];
    if let Some(t) = cfg.t {
        let x = gumbel_centred(t, &d);
        rows.extend([
            ("cdf", stationarity_cdf(t, &d)?.into()),
            ("separation", graph_separation(t, &d)?.into()),
            ("gumbel_argument", x.into()),
            ("gumbel_cdf", gumbel_limit_cdf(x).into()),
        ]);
    }
    let mut table = value_table("analytic stationarity", Some(&d), rows);
    if let Some(t) = cfg.t {
        table.meta("t", t);
    }
    Ok(table)
}

pub fn hitting(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let from = as_count(require(&cfg.from, "from")?, "from")?;
    let to = as_count(require(&cfg.to, "to")?, "to")?;
    let e = expected_hitting(from, to, &d)?;
    let mut table = value_table(
        "analytic hitting",
        Some(&d),
        vec![("expected_ln", e.value.ln().into()), ("expected", lin(e.value))],
    );
    table.meta("from", from).meta("to", to);
    Ok(table)
}

pub fn fluid(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let from = require(&cfg.from, "from")?;
    let to = require(&cfg.to, "to")?;
    let time = fluid_time(from, to, &d)?;
    let mut table = value_table(
        "analytic fluid",
        Some(&d),
        vec![("equilibrium_density", d.equilibrium_density().into()), ("time", time.into())],
    );
    table.meta("from", from).meta("to", to);
    Ok(table)
}

pub fn entropy(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let c = require(&cfg.c, "c")?;
    let e = entropy_exponent(c, &d)?;
    let mut table = value_table(
        "analytic entropy",
        Some(&d),
        vec![
            ("count", e.count.into()),
            ("exact", e.exact.into()),
            ("asymptotic", e.asymptotic.into()),
            ("per_vertex", (e.asymptotic / d.n() as f64).into()),
        ],
    );
    table.meta("c", c);
    Ok(table)
}

pub fn tail(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let i = as_count(require(&cfg.to, "to")?, "to")?;
    let tail = binomial_tail(i, &d)?;
    let (lo, hi) = tail.bounds.map_or((Cell::Empty, Cell::Empty), |(l, h)| (l.ln().into(), h.ln().into()));
    let mut table = value_table(
        "analytic tail",
        Some(&d),
        vec![
            ("tail_ln", tail.tail.ln().into()),
            ("tail", lin(tail.tail)),
            ("lower_bound_ln", lo),
            ("upper_bound_ln", hi),
            ("within_bounds", tail.within_bounds(1e-12).map_or(Cell::Empty, Cell::Bool)),
        ],
    );
    table.meta("to", i);
    Ok(table)
}

pub fn rates(cfg: &RunConfig) -> Result<Table, CliError> {
    let lo = cfg.eps_min.unwrap_or(0.01);
    let hi = cfg.eps_max.unwrap_or(0.79);
    let step = cfg.step.unwrap_or(0.01);
    if !(step > 0.0 && lo <= hi) {
        return Err(CliError::Validation(format!(
            "sweep needs eps_min <= eps_max and step > 0 (got {lo}, {hi}, {step})"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let mut table = Table::new(&["eps", "c_eps", "k", "i1", "k_leading", "i1_leading", "k_exceeds_i1"]);
    header(&mut table, "analytic rates", None);
    table.meta("eps_min", lo).meta("eps_max", hi).meta("step", step);
    let mut k_curve = Vec::with_capacity(count);
    let mut i_curve = Vec::with_capacity(count);
    for idx in 0..count {
        let eps = lo + idx as f64 * step;
        let r = rate_functions(eps)?;
        k_curve.push((eps, r.edge_route));
        i_curve.push((eps, r.component));
        table.push(
            RecordKind::Value,
            vec![
                ("eps", eps.into()),
                ("c_eps", r.c_eps.into()),
                ("k", r.edge_route.into()),
                ("i1", r.component.into()),
                ("k_leading", r.edge_route_leading.into()),
                ("i1_leading", r.component_leading.into()),
                ("k_exceeds_i1", (r.edge_route > r.component).into()),
            ],
        );
    }
    if let Some(path) = &cfg.svg {
        let chart = line_chart(
            "Component emergence exponents",
            "eps",
            "rate",
            &[
                Series { id: "edge-route", label: "K(eps) edge-count route", colour: "#1f77b4", points: &k_curve },
                Series { id: "component", label: "I1(eps) component route", colour: "#d62728", points: &i_curve },
            ],
        );
        std::fs::write(path, chart)?;
        table.meta("svg", path.display());
    }
    Ok(table)
}

fn sim_header(table: &mut Table, command: &str, d: &DerivedParams, seed: (u64, &str), replicas: Option<usize>) {
    header(table, command, Some(d));
    table.meta("seed", seed.0).meta("seed_source", seed.1);
    if let Some(r) = replicas {
        table.meta("replicas", r);
    }
}

pub fn trajectory(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let from = as_count(cfg.from.unwrap_or(0.0), "from")?;
    let horizon = require(&cfg.horizon, "horizon")?;
    let seed = seed(cfg);
    let tr = simulate_trajectory(&d, from, horizon, seed.0)?;
    let mut table = Table::new(&["time", "count", "horizon", "events", "final_count"]);
    sim_header(&mut table, "simulate trajectory", &d, seed, None);
    table.meta("from", from).meta("horizon", horizon);
    for &(t, k) in &tr.events {
        table.push(RecordKind::Event, vec![("time", t.into()), ("count", k.into())]);
    }
    table.push(
        RecordKind::Summary,
        vec![
            ("horizon", horizon.into()),
            ("events", (tr.events.len() - 1).into()),
            ("final_count", tr.events.last().map_or(from, |e| e.1).into()),
        ],
    );
    Ok(table)
}

pub fn sim_hitting(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = model(cfg)?;
    let from = as_count(require(&cfg.from, "from")?, "from")?;
    let to = as_count(require(&cfg.to, "to")?, "to")?;
    let r = replicas(cfg, 2)?;
    let cap = cap(cfg, &d)?;
    let seed = seed(cfg);
    let samples = sample_hitting_times(&d, from, to, r, seed.0, cap)?;
    let exact = expected_hitting(from, to, &d)?.value;
    let mut table = Table::new(&[
        "replica", "seed", "time", "censored", "mean", "half_width", "count", "censored_count",
        "expected", "expected_ln",
    ]);
    sim_header(&mut table, "simulate hitting", &d, seed, Some(r));
    table.meta("from", from).meta("to", to).meta("cap", cap);
    for (idx, s) in samples.iter().enumerate() {
        table.push(
            RecordKind::Replica,
            vec![
                ("replica", idx.into()),
                ("seed", s.seed.into()),
                ("time", Cell::opt_float(s.time())),
                ("censored", s.is_censored().into()),
            ],
        );
    }
    let times: Vec<f64> = samples.iter().filter_map(|s| s.time()).collect();
    let censored = samples.len() - times.len();
    let mut cells = vec![
        ("count", times.len().into()),
        ("censored_count", censored.into()),
        ("expected", lin(exact)),
        ("expected_ln", exact.ln().into()),
    ];
    if let Ok(ci) = mean_ci(&times) {
        cells.extend([("mean", ci.mean.into()), ("half_width", ci.half_width.into())]);
    }
    table.push(RecordKind::Summary, cells);
    let failure = times
        .is_empty()
        .then(|| CliError::Capped(format!("all {r} first passages were censored at {cap}")));
    Ok(Outcome { table, failure })
}

pub fn sim_stationarity(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let r = replicas(cfg, 2)?;
    let seed = seed(cfg);
    let times = sample_stationarity_times(&d, r, seed.0);
    let ci = mean_ci(&times)?;
    let ks_cdf = ks_distance(&times, |t| stationarity_cdf(t.max(0.0), &d).expect("t >= 0"));
    let centred: Vec<f64> = times.iter().map(|&t| gumbel_centred(t, &d)).collect();
    let ks_gumbel = ks_distance(&centred, gumbel_limit_cdf);
    let mut table = Table::new(&[
        "replica", "seed", "time", "mean", "half_width", "count", "expected", "ks_cdf", "ks_gumbel",
    ]);
    sim_header(&mut table, "simulate stationarity", &d, seed, Some(r));
    for (idx, &t) in times.iter().enumerate() {
        table.push(
            RecordKind::Replica,
            vec![
                ("replica", idx.into()),
                ("seed", dyner::rng::replica_seed(seed.0, idx as u64).into()),
                ("time", t.into()),
            ],
        );
    }
    table.push(
        RecordKind::Summary,
        vec![
            ("mean", ci.mean.into()),
            ("half_width", ci.half_width.into()),
            ("count", ci.count.into()),
            ("expected", expected_stationarity_time(&d).into()),
            ("ks_cdf", ks_cdf.into()),
            ("ks_gumbel", ks_gumbel.into()),
        ],
    );
    Ok(table)
}

/// Slack added on each side of the asymptotic exponent for the bracket check.
pub fn bracket_slack(n: u64) -> f64 {
    (n as f64).ln() + 5.0
}

pub fn renewal(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let c = require(&cfg.c, "c")?;
    let r = replicas(cfg, dyner::simulate::MIN_RENEWAL_REPLICAS)?;
    let seed = seed(cfg);
    let est = estimate_hitting_renewal(&d, c, r, seed.0)?;
    let exponent = entropy_exponent(c, &d)?;
    let slack = bracket_slack(d.n());
    let (lo, hi) = (exponent.asymptotic - slack, exponent.asymptotic + slack);
    let mut table = Table::new(&[
        "replica", "seed", "time_above", "descent_time", "i", "s", "time_above_mean",
        "time_above_half_width", "tail_ln", "cycle_ln", "lead_in", "descent", "estimate_ln",
        "estimate", "half_width", "upper_biased_ln", "exponent_asymptotic", "bracket_low_ln",
        "bracket_high_ln", "within_bracket",
    ]);
    sim_header(&mut table, "simulate renewal", &d, seed, Some(r));
    table.meta("c", c);
    // the estimator's replicas, regenerated from the same seeds for reporting
    let cycles = replicate(r, seed.0, |s| (s, sample_time_above(&d, est.i, est.s, s).expect("validated")));
    for (idx, (s, cy)) in cycles.iter().enumerate() {
        table.push(
            RecordKind::Replica,
            vec![
                ("replica", idx.into()),
                ("seed", (*s).into()),
                ("time_above", cy.time_above.into()),
                ("descent_time", cy.descent_time.into()),
            ],
        );
    }
    let ln = est.estimate.ln();
    table.push(
        RecordKind::Summary,
        vec![
            ("i", est.i.into()),
            ("s", est.s.into()),
            ("time_above_mean", est.time_above.mean.into()),
            ("time_above_half_width", est.time_above.half_width.into()),
            ("tail_ln", est.tail.ln().into()),
            ("cycle_ln", est.cycle.ln().into()),
            ("lead_in", lin(est.lead_in)),
            ("descent", lin(est.descent)),
            ("estimate_ln", ln.into()),
            ("estimate", lin(est.estimate)),
            ("half_width", lin(est.half_width)),
            ("upper_biased_ln", est.upper_biased.ln().into()),
            ("exponent_asymptotic", exponent.asymptotic.into()),
            ("bracket_low_ln", lo.into()),
            ("bracket_high_ln", hi.into()),
            ("within_bracket", (lo <= ln && ln <= hi).into()),
        ],
    );
    Ok(table)
}

pub fn escape(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = model(cfg)?;
    let j = as_count(require(&cfg.from, "from")?, "from")?;
    let i = as_count(require(&cfg.to, "to")?, "to")?;
    let s = require(&cfg.lower, "lower")?;
    let r = replicas(cfg, 2)?;
    let seed = seed(cfg);
    let exact = escape_probability(j, i, s, &d)?;
    let hits = replicate(r, seed.0, |rs| (rs, sample_escape(&d, j, i, s, rs).expect("validated")));
    let indicator: Vec<f64> = hits.iter().map(|&(_, h)| if h { 1.0 } else { 0.0 }).collect();
    let ci = mean_ci(&indicator)?;
    let mut table = Table::new(&["replica", "seed", "escaped", "probability", "half_width", "count", "exact"]);
    sim_header(&mut table, "simulate escape", &d, seed, Some(r));
    table.meta("from", j).meta("to", i).meta("lower", s);
    for (idx, &(rs, h)) in hits.iter().enumerate() {
        table.push(
            RecordKind::Replica,
            vec![("replica", idx.into()), ("seed", rs.into()), ("escaped", h.into())],
        );
    }
    table.push(
        RecordKind::Summary,
        vec![
            ("probability", ci.mean.into()),
            ("half_width", ci.half_width.into()),
            ("count", ci.count.into()),
            ("exact", exact.into()),
        ],
    );
    Ok(table)
}

fn passage_cell(p: Passage) -> (Cell, Cell) {
    match p {
        Passage::Hit(t) => (t.into(), false.into()),
        Passage::Censored { .. } => (Cell::Empty, true.into()),
    }
}

pub fn emergence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = model(cfg)?;
    let eps = require(&cfg.eps, "eps")?;
    let delta = cfg.delta.unwrap_or(0.1);
    let targets = emergence_targets(&d, eps, delta)?;
    let r = replicas(cfg, 2)?;
    let cap = cap(cfg, &d)?;
    let seed = seed(cfg);
    let runs = replicate(r, seed.0, |s| sample_emergence(&d, eps, delta, s, cap).expect("validated"));
    let mut table = Table::new(&[
        "replica", "seed", "component_time", "component_censored", "edge_time", "edge_censored",
        "largest_at_edge_passage", "dominated", "component_target", "edge_target",
        "domination_fraction", "half_width", "count", "component_mean", "component_half_width",
        "component_censored_count",
    ]);
    sim_header(&mut table, "components emergence", &d, seed, Some(r));
    table.meta("eps", eps).meta("delta", delta).meta("cap", cap);
    for (idx, e) in runs.iter().enumerate() {
        let (ct, cc) = passage_cell(e.component);
        let (et, ec) = passage_cell(e.edge_count);
        table.push(
            RecordKind::Replica,
            vec![
                ("replica", idx.into()),
                ("seed", e.seed.into()),
                ("component_time", ct),
                ("component_censored", cc),
                ("edge_time", et),
                ("edge_censored", ec),
                ("largest_at_edge_passage", e.largest_at_edge_passage.into()),
                ("dominated", e.dominated.into()),
            ],
        );
    }
    let dom: Vec<f64> = runs.iter().map(|e| if e.dominated { 1.0 } else { 0.0 }).collect();
    let ci = mean_ci(&dom)?;
    let times: Vec<f64> = runs
        .iter()
        .filter_map(|e| match e.component {
            Passage::Hit(t) => Some(t),
            Passage::Censored { .. } => None,
        })
        .collect();
    let mut cells = vec![
        ("component_target", targets.component_size.into()),
        ("edge_target", targets.edge_count.into()),
        ("domination_fraction", ci.mean.into()),
        ("half_width", ci.half_width.into()),
        ("count", ci.count.into()),
        ("component_censored_count", (runs.len() - times.len()).into()),
    ];
    if let Ok(t) = mean_ci(&times) {
        cells.extend([("component_mean", t.mean.into()), ("component_half_width", t.half_width.into())]);
    }
    table.push(RecordKind::Summary, cells);
    let failure = times
        .is_empty()
        .then(|| CliError::Capped(format!("every run was censored at {cap}")));
    Ok(Outcome { table, failure })
}

pub fn static_graph(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = require(&cfg.n, "n")?;
    let (m, eps) = match (cfg.m, cfg.eps) {
        (Some(m), _) => (m, None),
        (None, Some(eps)) => {
            let c = c_epsilon(eps)?;
            (dyner::model::round_half_even(c * n as f64), Some(eps))
        }
        (None, None) => {
            return Err(CliError::Validation("give either `m` or `eps`".into()));
        }
    };
    let r = replicas(cfg, 2)?;
    let seed = seed(cfg);
    let sizes = replicate(r, seed.0, |s| (s, static_er_largest_component(n, m, s)));
    let mut table = Table::new(&["replica", "seed", "largest", "fraction", "edges", "mean_fraction", "half_width", "count"]);
    header(&mut table, "components static", None);
    table.meta("n", n).meta("m", m).meta("seed", seed.0).meta("seed_source", seed.1).meta("replicas", r);
    if let Some(eps) = eps {
        table.meta("eps", eps);
    }
    let mut fractions = Vec::with_capacity(r);
    for (idx, (s, size)) in sizes.into_iter().enumerate() {
        let size = size?;
        let f = size as f64 / n as f64;
        fractions.push(f);
        table.push(
            RecordKind::Replica,
            vec![("replica", idx.into()), ("seed", s.into()), ("largest", size.into()), ("fraction", f.into())],
        );
    }
    let ci = mean_ci(&fractions)?;
    table.push(
        RecordKind::Summary,
        vec![
            ("edges", m.into()),
            ("mean_fraction", ci.mean.into()),
            ("half_width", ci.half_width.into()),
            ("count", ci.count.into()),
        ],
    );
    Ok(table)
}
