use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use qwalk::ddim::{self, CoinBlocks};
use qwalk::eigen;
use qwalk::genfun::{self, ExitProbabilities};
use qwalk::simulate::{self, fit_decay, wavepacket_reflection, AbsorptionRecord, BoundaryConfig, DecayModel};
use qwalk::{Coin, StartSpinor};
use serde_json::json;

use crate::config::Layers;
use crate::report::{record_rows, Cell, Format, Report, RECORD_COLUMNS};
use crate::spec::{self, DdimCoin};
use crate::{CliError, DdimArgs, DecayArgs, ExitArgs, OutputArgs, SimulateArgs, TablesArgs, WalkArgs};

fn emit(report: &Report, layers: &mut Layers, out: OutputArgs) -> Result<(), CliError> {
    let format = match layers.get_or("format", out.format, "csv")?.as_str() {
        "csv" => Format::Csv,
        "json" => Format::Json,
        other => return Err(CliError::config("format", format!("expected csv or json, got {other:?}"))),
    };
    let path = layers.get("output", out.output)?;
    let mut report = report.clone();
    report.config = layers.resolved.clone();
    match path {
        Some(p) => {
            let f = File::create(&p).map_err(|e| CliError::config("output", format!("cannot create {p}: {e}")))?;
            let mut w = BufWriter::new(f);
            report.write(format, &mut w).and_then(|_| w.flush()).map_err(CliError::io)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            report.write(format, &mut w).and_then(|_| w.flush()).map_err(CliError::io)
        }
    }
}

fn positive(layers: &mut Layers, key: &'static str, flag: Option<String>, default: Option<usize>) -> Result<usize, CliError> {
    let v: Option<i64> = layers.parse(key, flag)?;
    match (v, default) {
        (Some(v), _) if v >= 1 => Ok(v as usize),
        (Some(v), _) => Err(CliError::config(key, format!("must be >= 1, got {v}"))),
        (None, Some(d)) => {
            layers.resolved.insert(key.into(), json!(d.to_string()));
            Ok(d)
        }
        (None, None) => Err(CliError::config(key, "is required")),
    }
}

struct Walk {
    coin: Coin,
    start: StartSpinor,
    boundary: BoundaryConfig,
    steps: usize,
}

fn walk(layers: &mut Layers, a: WalkArgs, default_steps: usize) -> Result<Walk, CliError> {
    let coin = spec::coin(&layers.get_or("coin", a.coin, "hadamard")?)?;
    let start = spec::start(&layers.get_or("start", a.start, "R")?, &coin)?;
    let wall = layers.parse::<i64>("wall", a.wall)?;
    let walls = layers.get("walls", a.walls)?;
    let boundary = match (wall, walls) {
        (Some(_), Some(_)) => return Err(CliError::config("walls", "give either --wall or --walls, not both")),
        (Some(m), None) => BoundaryConfig::OneWall { m },
        (None, Some(s)) => {
            let (m_left, m_right) = spec::walls(&s)?;
            BoundaryConfig::TwoWall { m_left, m_right }
        }
        (None, None) => return Err(CliError::config("wall", "a wall is required: --wall M or --walls M_L,M_R")),
    };
    boundary.validate().map_err(|e| {
        let flag = if matches!(boundary, BoundaryConfig::OneWall { .. }) { "wall" } else { "walls" };
        CliError::core(e, flag)
    })?;
    let steps = positive(layers, "steps", a.steps, Some(default_steps))?;
    Ok(Walk { coin, start, boundary, steps })
}

fn run_walk(w: &Walk) -> Result<AbsorptionRecord, CliError> {
    match w.boundary {
        BoundaryConfig::OneWall { m } => simulate::run_one_wall(w.coin, w.start, m, w.steps),
        BoundaryConfig::TwoWall { m_left, m_right } => simulate::run_two_wall(w.coin, w.start, m_left, m_right, w.steps),
        BoundaryConfig::None => unreachable!("walk() always sets a wall"),
    }
    .map_err(|e| CliError::core(e, "steps"))
}

pub fn simulate(config: Option<&Path>, a: SimulateArgs) -> Result<(), CliError> {
    let mut layers = Layers::load(config, "simulate")?;
    let k0 = layers.parse::<f64>("packet-k0", a.packet_k0)?;
    let width = layers.parse::<f64>("packet-width", a.packet_width)?;
    let w = walk(&mut layers, a.walk, 1000)?;
    let report = match (k0, width) {
        (None, None) => {
            let rec = run_walk(&w)?;
            let mut r = Report::new(Default::default(), RECORD_COLUMNS.to_vec());
            r.rows = record_rows(&rec);
            r
        }
        (Some(k0), width) => {
            let BoundaryConfig::OneWall { m } = w.boundary else {
                return Err(CliError::config("walls", "packets are sent at a single wall; use --wall"));
            };
            let width = width.unwrap_or(10.0);
            let res = wavepacket_reflection(w.coin, k0, width, m, w.steps).map_err(|e| {
                let flag = match &e {
                    qwalk::Error::Domain { param: "M", .. } => "wall",
                    qwalk::Error::Domain { param: "T", .. } => "steps",
                    qwalk::Error::Domain { param: "k0", .. } => "packet-k0",
                    qwalk::Error::Domain { param: "rho", .. } => "coin",
                    _ => "packet-width",
                };
                CliError::core(e, flag)
            })?;
            let mut r = Report::new(Default::default(), vec!["speed", "reflection"]);
            r.rows.push(vec![Cell::Num(res.speed), Cell::Num(res.reflection)]);
            r
        }
        (None, Some(_)) => return Err(CliError::config("packet-width", "needs --packet-k0")),
    };
    emit(&report, &mut layers, a.out)
}

pub fn tables(config: Option<&Path>, a: TablesArgs) -> Result<(), CliError> {
    let mut layers = Layers::load(config, "tables")?;
    let which = layers.get_or("table", a.table, "1")?;
    let m_max = positive(&mut layers, "m-max", a.m_max, Some(5))? as u32;
    let report = match which.as_str() {
        "1" => {
            let rho: f64 = layers.parse("rho", a.rho)?.unwrap_or(0.5);
            if !(rho > 0.0 && rho < 1.0) {
                return Err(CliError::config("rho", format!("must satisfy 0 < rho < 1, got {rho}")));
            }
            let mut r = Report::new(Default::default(), vec!["M", "C_l", "C_r", "C_lr"]);
            for m in 1..=m_max {
                let e = eigen::escape_prob_one_wall(rho, StartSpinor::left(), m).map_err(|e| CliError::core(e, "m-max"))?;
                r.rows.push(vec![Cell::Int(m as i64), Cell::Num(e.c_l), Cell::Num(e.c_r), Cell::Num(e.c_lr)]);
            }
            let lim = genfun::exit_prob_limit(rho, StartSpinor::left()).map_err(|e| CliError::core(e, "rho"))?;
            r.rows.push(vec![
                Cell::Text("inf".into()),
                Cell::Num(1.0 - lim.p),
                Cell::Num(1.0 - lim.q),
                Cell::Num(-2.0 * lim.pq_cross),
            ]);
            r
        }
        "2" => {
            if layers.get("rho", a.rho)?.is_some_and(|r| r.trim().parse::<f64>() != Ok(0.5)) {
                return Err(CliError::config("rho", "table 2 is defined for the Hadamard coin (rho = 0.5) only"));
            }
            let mut r = Report::new(Default::default(), vec!["M_R", "D_l", "D_r", "D_lr"]);
            for m in 1..=m_max {
                let e = eigen::transmission_two_wall(StartSpinor::left(), m).map_err(|e| CliError::core(e, "m-max"))?;
                r.rows.push(vec![Cell::Int(m as i64), Cell::Num(e.c_l), Cell::Num(e.c_r), Cell::Num(e.c_lr)]);
            }
            let lim = eigen::transmission_limit(StartSpinor::left());
            r.rows.push(vec![Cell::Text("inf".into()), Cell::Num(lim.c_l), Cell::Num(lim.c_r), Cell::Num(lim.c_lr)]);
            r
        }
        other => return Err(CliError::config("table", format!("expected 1 or 2, got {other:?}"))),
    };
    emit(&report, &mut layers, a.out)
}

pub fn decay(config: Option<&Path>, a: DecayArgs) -> Result<(), CliError> {
    let mut layers = Layers::load(config, "decay")?;
    let w = walk(&mut layers, a.walk, 100_000)?;
    let window = match layers.get("window", a.window)? {
        Some(s) => spec::range(&s, "window")?,
        None => (w.steps / 100).max(1)..=w.steps,
    };
    let (model, p_inf) = match w.boundary {
        BoundaryConfig::OneWall { m } => {
            let rho = w.coin.rho();
            if !(rho > 0.0 && rho < 1.0) {
                return Err(CliError::config("coin", format!("the survival plateau needs 0 < rho < 1, got {rho}")));
            }
            let esc = eigen::escape_prob_coin(&w.coin, w.start, m as u32).map_err(|e| CliError::core(e, "wall"))?;
            (DecayModel::PowerLawPlusConstant, esc.lambda)
        }
        _ => (DecayModel::PowerLaw, 0.0),
    };
    // check the asymptote's preconditions before the long run
    eigen::survival_asymptote(w.boundary, 1.0, p_inf).map_err(|e| CliError::core(e, "walls"))?;
    let rec = run_walk(&w)?;
    let mut r = Report::new(Default::default(), vec!["t", "survival", "asymptote"]);
    for t in 1..=w.steps {
        let asym = eigen::survival_asymptote(w.boundary, t as f64, p_inf).map_err(|e| CliError::core(e, "walls"))?;
        r.rows.push(vec![Cell::Int(t as i64), Cell::Num(rec.remaining[t - 1]), Cell::Num(asym)]);
    }
    let fit = fit_decay(&rec, model, window.clone()).map_err(|e| CliError::core(e, "window"))?;
    r.fit = Some(json!({
        "model": model,
        "window": [window.start(), window.end()],
        "exponent": fit.exponent,
        "coefficient": fit.coefficient,
        "constant": fit.constant,
        "plateau_expected": p_inf,
    }));
    emit(&r, &mut layers, a.out)
}

pub fn ddim(config: Option<&Path>, a: DdimArgs) -> Result<(), CliError> {
    let mut layers = Layers::load(config, "ddim")?;
    let d = positive(&mut layers, "dim", a.dim, Some(2))?;
    if d > 3 {
        return Err(CliError::config("dim", format!("must be 1, 2 or 3, got {d}")));
    }
    let coin = spec::ddim_coin(&layers.get_or("coin", a.coin, "hadamard")?, d)?;
    let blocks = match &coin {
        DdimCoin::Line(c) => CoinBlocks::from_coin(c, d).map_err(|e| CliError::core(e, "coin"))?,
        DdimCoin::Blocks(b) => b.clone(),
    };
    let psi0 = match layers.get("start", a.start)? {
        Some(s) => spec::amplitudes(&s, "start")?,
        None => {
            let mut v = vec![C64::new(0.0, 0.0); 2 * d];
            v[0] = C64::new(1.0, 0.0);
            v
        }
    };
    if psi0.len() != 2 * d {
        return Err(CliError::config("start", format!("need {} direction amplitudes for --dim {d}, got {}", 2 * d, psi0.len())));
    }
    if psi0.iter().all(|z| *z == C64::new(0.0, 0.0)) || psi0.iter().any(|z| !z.is_finite()) {
        return Err(CliError::config("start", "amplitudes must be finite and not all zero"));
    }
    let wall = layers.parse::<i64>("wall", a.wall)?;
    if let Some(m) = wall {
        if m < 1 {
            return Err(CliError::config("wall", format!("hyperplane position must satisfy M >= 1, got {m}")));
        }
    }
    let steps = positive(&mut layers, "steps", a.steps, Some(100))?;
    let cap_gib: f64 = layers.parse("mem-cap-gib", a.mem_cap_gib)?.unwrap_or(4.0);
    let need = ddim::memory_estimate(d, steps, wall);
    if need as f64 > cap_gib * (1u64 << 30) as f64 {
        return Err(CliError::resource(
            "mem-cap-gib",
            format!("run needs about {:.3} GiB ({need} bytes) of state, over the cap of {cap_gib} GiB", need as f64 / (1u64 << 30) as f64),
        ));
    }
    // the d = 1 walk with a line coin must agree with the 1D engine bit for bit
    let line = match (&coin, d) {
        (DdimCoin::Line(c), 1) => Some((*c, StartSpinor::new(psi0[0], psi0[1]).map_err(|e| CliError::core(e, "start"))?)),
        _ => None,
    };
    let mut report = match wall {
        Some(m) => {
            let tail = positive(&mut layers, "tail", a.tail, Some((steps / 2).max(3)))?;
            let rec = ddim::run_absorbing_hyperplane(&blocks, &psi0, m, steps).map_err(|e| CliError::core(e, "start"))?;
            let extrapolated = ddim::extrapolate_survival(&rec, tail).map_err(|e| CliError::core(e, "tail"))?;
            let mut fit = json!({ "survival_extrapolated": extrapolated, "tail": tail });
            if let Some((c, s)) = line {
                let reference = simulate::run_one_wall(c, s, m, steps).map_err(|e| CliError::core(e, "steps"))?;
                let same = reference.per_step_right == rec.per_step_right && reference.remaining == rec.remaining;
                fit["reduction_check"] = json!(if same { "identical" } else { "differs" });
                if !same {
                    return Err(CliError { code: 4, message: "d = 1 run differs from the line walk".into() });
                }
            }
            let mut r = Report::new(Default::default(), RECORD_COLUMNS.to_vec());
            r.rows = record_rows(&rec);
            r.fit = Some(fit);
            r
        }
        None => {
            let margin: f64 = layers.parse("front-margin", a.front_margin)?.unwrap_or(10.0);
            let (state, diags) = ddim::run_free(&blocks, &psi0, steps, margin).map_err(|e| CliError::core(e, "start"))?;
            let mut r = Report::new(Default::default(), vec!["t", "norm", "front_leakage", "peak_amp"]);
            for row in &diags {
                r.rows.push(vec![Cell::Int(row.t as i64), Cell::Num(row.norm), Cell::Num(row.front_leakage), Cell::Num(row.peak_amp)]);
            }
            if let Some((c, s)) = line {
                let mut l = qwalk::WalkState1D::point(s);
                for _ in 0..steps {
                    l = simulate::step(&l, &c);
                }
                let same = (l.offset()..=l.last()).all(|n| {
                    let (a, b) = l.amp(n);
                    a == state.amp(&[n], 0) && b == state.amp(&[n], 1)
                });
                if !same {
                    return Err(CliError { code: 4, message: "d = 1 run differs from the line walk".into() });
                }
                r.fit = Some(json!({ "reduction_check": "identical" }));
            }
            r
        }
    };
    if let Some(fit) = report.fit.as_mut() {
        if let Some(check) = fit.get("reduction_check") {
            eprintln!("d = 1 reduction check: {}", check.as_str().unwrap_or("?"));
        }
    }
    emit(&report, &mut layers, a.out)
}

pub fn exit(config: Option<&Path>, a: ExitArgs) -> Result<(), CliError> {
    let mut layers = Layers::load(config, "exit")?;
    let coin = spec::coin(&layers.get_or("coin", a.coin, "hadamard")?)?;
    let start = spec::start(&layers.get_or("start", a.start, "L")?, &coin)?;
    let method = layers.get_or("method", a.method, "genfun")?;
    let ms = spec::range(&layers.get_or("m-range", a.m_range, "1..5")?, "m-range")?;
    if *ms.start() < 1 {
        return Err(CliError::config("m-range", "wall positions must satisfy M >= 1"));
    }
    let mut r = Report::new(Default::default(), vec!["M", "p", "q", "pq_cross", "r"]);
    let row = |m: Cell, e: ExitProbabilities| vec![m, Cell::Num(e.p), Cell::Num(e.q), Cell::Num(e.pq_cross), Cell::Num(e.r)];
    match method.as_str() {
        "genfun" => {
            for m in ms {
                let e = genfun::exit_prob_one_wall(&coin, start, m as u32).map_err(|e| CliError::core(e, "m-range"))?;
                r.rows.push(row(Cell::Int(m as i64), e));
            }
        }
        "eigen" => {
            for m in ms {
                let esc = eigen::escape_prob_coin(&coin, start, m as u32).map_err(|e| CliError::core(e, "coin"))?;
                let e = ExitProbabilities { p: 1.0 - esc.c_l, q: 1.0 - esc.c_r, pq_cross: -0.5 * esc.c_lr, r: 1.0 - esc.lambda };
                r.rows.push(row(Cell::Int(m as i64), e));
            }
        }
        "asymptotic" => {
            if coin.rho() != 0.5 {
                return Err(CliError::config("coin", "the asymptotic series is for rho = 0.5 only"));
            }
            let terms = positive(&mut layers, "terms", a.terms, Some(5))? as u32;
            for m in ms {
                let e = genfun::asymptotic_exit(start.reduced_for(&coin), m as u32, terms).map_err(|e| {
                    let flag = if matches!(e, qwalk::Error::Domain { param: "terms", .. }) { "terms" } else { "m-range" };
                    CliError::core(e, flag)
                })?;
                r.rows.push(row(Cell::Int(m as i64), e));
            }
        }
        "limit" => {
            let e = genfun::exit_prob_limit(coin.rho(), start.reduced_for(&coin)).map_err(|e| CliError::core(e, "coin"))?;
            r.rows.push(row(Cell::Text("inf".into()), e));
        }
        other => return Err(CliError::config("method", format!("expected genfun, eigen, asymptotic or limit, got {other:?}"))),
    }
    emit(&r, &mut layers, a.out)
}
