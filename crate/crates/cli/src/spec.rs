//! Parsers for the compact `--coin`, `--start` and range arguments.

use std::ops::RangeInclusive;

use num_complex::Complex64 as C64;
use qwalk::ddim::CoinBlocks;
use qwalk::{Coin, StartSpinor};

use crate::CliError;

/// `hadamard` or `rho=R[,phi=P][,psi=S][,eta=E]` (missing phases are 0).
pub fn coin(s: &str) -> Result<Coin, CliError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("hadamard") {
        return Ok(Coin::hadamard());
    }
    let mut vals = [None::<f64>; 4];
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::config("coin", format!("expected hadamard or rho=..,phi=..,psi=..,eta=.., got {s:?}")))?;
        let slot = match k.trim() {
            "rho" => 0,
            "phi" => 1,
            "psi" => 2,
            "eta" => 3,
            other => return Err(CliError::config("coin", format!("unknown coin parameter {other:?}"))),
        };
        let x: f64 = v.trim().parse().map_err(|_| CliError::config("coin", format!("{k} must be a number, got {v:?}")))?;
        vals[slot] = Some(x);
    }
    let rho = vals[0].ok_or_else(|| CliError::config("coin", "rho is required"))?;
    Coin::new(rho, vals[1].unwrap_or(0.0), vals[2].unwrap_or(0.0), vals[3].unwrap_or(0.0)).map_err(|e| CliError::core(e, "coin"))
}

/// Complex amplitudes separated by commas, each in `num-complex` syntax
/// (`0.6`, `0.8i`, `0.3-0.4i`).
pub fn amplitudes(s: &str, flag: &'static str) -> Result<Vec<C64>, CliError> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<C64>().map_err(|_| CliError::config(flag, format!("{p:?} is not a complex number")))
        })
        .collect()
}

/// `L`, `R`, `α,β`, or `compensated:α,β` — the start that reproduces, under
/// `coin`, what `(α, β)` gives under the real coin of the same `ρ`.
pub fn start(s: &str, coin: &Coin) -> Result<StartSpinor, CliError> {
    let s = s.trim();
    let (compensate, body) = match s.strip_prefix("compensated:") {
        Some(rest) => (true, rest),
        None if s == "compensated" => {
            return Err(CliError::config("start", "compensated needs amplitudes, e.g. compensated:0,1"));
        }
        None => (false, s),
    };
    let plain = match body {
        "L" | "l" => StartSpinor::left(),
        "R" | "r" => StartSpinor::right(),
        _ => {
            let a = amplitudes(body, "start")?;
            if a.len() != 2 {
                return Err(CliError::config("start", format!("need two amplitudes alpha,beta, got {}", a.len())));
            }
            StartSpinor::new(a[0], a[1]).map_err(|e| CliError::core(e, "start"))?
        }
    };
    Ok(if compensate { plain.compensated_for(coin) } else { plain })
}

/// Coin blocks for the d-dimensional walk: a real line coin (`hadamard`,
/// `rho=..`), `rotation=θ`, or explicit `blocks=a,b,c,d;a,b,c,d;…` given as
/// `[[a, b], [c, d]]` per axis.
pub enum DdimCoin {
    Line(Coin),
    Blocks(CoinBlocks),
}

pub fn ddim_coin(s: &str, d: usize) -> Result<DdimCoin, CliError> {
    let s = s.trim();
    if let Some(theta) = s.strip_prefix("rotation=") {
        let t: f64 = theta.trim().parse().map_err(|_| CliError::config("coin", format!("rotation angle {theta:?} is not a number")))?;
        return Ok(DdimCoin::Blocks(CoinBlocks::rotation(d, t)));
    }
    if let Some(list) = s.strip_prefix("blocks=") {
        let blocks = list
            .split(';')
            .map(|b| {
                let v: Vec<f64> = b
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::config("coin", format!("block {b:?} must be four numbers")))?;
                match v[..] {
                    [a, b, c, d] => Ok([[a, b], [c, d]]),
                    _ => Err(CliError::config("coin", format!("block {b:?} must be four numbers"))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if blocks.len() != d {
            return Err(CliError::config("coin", format!("{} blocks given for --dim {d}", blocks.len())));
        }
        return CoinBlocks::new(blocks).map(DdimCoin::Blocks).map_err(|e| CliError::core(e, "coin"));
    }
    Ok(DdimCoin::Line(coin(s)?))
}

/// `a..b`, `a..=b` or `a,b`, inclusive.
pub fn range(s: &str, flag: &'static str) -> Result<RangeInclusive<usize>, CliError> {
    let s = s.trim();
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once(','))
        .ok_or_else(|| CliError::config(flag, format!("expected a range like 10..100, got {s:?}")))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| CliError::config(flag, format!("{x:?} is not a non-negative integer")));
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(CliError::config(flag, format!("range start {a} exceeds its end {b}")));
    }
    Ok(a..=b)
}

/// `M_L,M_R`
pub fn walls(s: &str) -> Result<(i64, i64), CliError> {
    let (a, b) = s.split_once(',').ok_or_else(|| CliError::config("walls", format!("expected M_L,M_R, got {s:?}")))?;
    let parse = |x: &str| x.trim().parse::<i64>().map_err(|_| CliError::config("walls", format!("{x:?} is not an integer")));
    Ok((parse(a)?, parse(b)?))
}
