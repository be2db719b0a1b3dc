use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::contractions::ContractionSeq;
use crate::ergodic::HolderPotential;
use crate::error::{Error, Result};
use crate::families::{ExpandingCircle, QuadraticMap, VianaMap, VianaParams};
use crate::symbolic::WeightedShiftMetric;

/// `name` or `name:key=value,key=value`.
fn split_spec(spec: &str) -> Result<(&str, BTreeMap<&str, &str>)> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("malformed parameter '{part}' in '{spec}'")))?;
        if params.insert(k.trim(), v.trim()).is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate parameter '{k}' in '{spec}'"
            )));
        }
    }
    Ok((name.trim(), params))
}

fn take_f64(params: &mut BTreeMap<&str, &str>, key: &str, spec: &str) -> Result<Option<f64>> {
    params
        .remove(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("'{key}={v}' in '{spec}' is not a number")))
        })
        .transpose()
}

fn require(v: Option<f64>, key: &str, spec: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidInput(format!("'{spec}' is missing '{key}='")))
}

fn no_leftovers(params: &BTreeMap<&str, &str>, spec: &str) -> Result<()> {
    match params.keys().next() {
        Some(k) => Err(Error::InvalidInput(format!(
            "unknown parameter '{k}' in '{spec}'"
        ))),
        None => Ok(()),
    }
}

fn as_u32(v: f64, key: &str) -> Result<u32> {
    if v.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&v) {
        return Err(Error::InvalidInput(format!(
            "{key} must be a nonnegative integer, got {v}"
        )));
    }
    Ok(v as u32)
}

#[derive(Debug, Clone, Copy)]
pub enum MapChoice {
    Circle(ExpandingCircle),
    Quadratic(QuadraticMap),
    Viana(VianaMap),
}

pub fn parse_map(spec: &str) -> Result<MapChoice> {
    let (name, mut p) = split_spec(spec)?;
    let map = match name {
        "doubling" => MapChoice::Circle(ExpandingCircle::new(2)?),
        "expanding" => {
            let d = require(take_f64(&mut p, "d", spec)?, "d", spec)?;
            MapChoice::Circle(ExpandingCircle::new(as_u32(d, "d")?)?)
        }
        "quadratic" => {
            let a = take_f64(&mut p, "a", spec)?.unwrap_or(2.0);
            MapChoice::Quadratic(QuadraticMap::new(a)?)
        }
        "viana" => {
            let a0 = take_f64(&mut p, "a0", spec)?.unwrap_or(1.8);
            let alpha = take_f64(&mut p, "alpha", spec)?.unwrap_or(0.01);
            let d = as_u32(take_f64(&mut p, "d", spec)?.unwrap_or(16.0), "d")?;
            MapChoice::Viana(VianaMap::new(VianaParams::new(a0, alpha, d)?))
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown map '{other}'; expected doubling, expanding:d=N, quadratic:a=A or viana:a0=..,alpha=..,d=.."
            )))
        }
    };
    no_leftovers(&p, spec)?;
    Ok(map)
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("'{t}' in {} is not a number", path.display())))
        })
        .collect()
}

pub fn parse_potential(spec: &str, map: ExpandingCircle) -> Result<HolderPotential> {
    match spec.strip_prefix("table:") {
        Some(path) => HolderPotential::from_table(format!("table:{path}"), read_numbers(Path::new(path))?),
        None => HolderPotential::named(spec, map),
    }
}

pub fn parse_contraction(spec: &str) -> Result<ContractionSeq> {
    if let Some(path) = spec.strip_prefix("table:") {
        return Ok(ContractionSeq::table(read_numbers(Path::new(path))?));
    }
    let (name, mut p) = split_spec(spec)?;
    let seq = match name {
        "exp" => ContractionSeq::exponential(require(take_f64(&mut p, "lambda", spec)?, "lambda", spec)?),
        "power" => {
            let a = require(take_f64(&mut p, "a", spec)?, "a", spec)?;
            let b = require(take_f64(&mut p, "b", spec)?, "b", spec)?;
            ContractionSeq::power(a, b)
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown contraction '{other}'; expected exp:lambda=.., power:a=..,b=.. or table:<path>"
            )))
        }
    };
    no_leftovers(&p, spec)?;
    Ok(seq)
}

pub fn parse_weights(spec: &str) -> Result<WeightedShiftMetric> {
    let (name, mut p) = split_spec(spec)?;
    let m = match name {
        "geom" => {
            let q = require(take_f64(&mut p, "q", spec)?, "q", spec)?;
            let c = take_f64(&mut p, "c", spec)?.unwrap_or(1.0);
            WeightedShiftMetric::geometric(c, q)?
        }
        "power" => {
            let a = require(take_f64(&mut p, "a", spec)?, "a", spec)?;
            let b = require(take_f64(&mut p, "b", spec)?, "b", spec)?;
            WeightedShiftMetric::power(a, b)?
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown weights '{other}'; expected geom:q=..[,c=..] or power:a=..,b=.."
            )))
        }
    };
    no_leftovers(&p, spec)?;
    Ok(m)
}
