//! Distribution mini-grammar shared by the CLI and config files.
//!
//! ```text
//! finite:0.5,0.3,0.2 | frac:c=2 | powratio:a=4
//! geomdefect:C=0.5,r=0.5 | harmonic:r=0.3,alpha0=0.7
//! sparse(eps=0.5;<base>) | pgf(geom1:p=0.5;<base>) | pgf(const:3;<base>)
//! suscept(const:0.5;<base>) | suscept(recip;<base>) | suscept(seq:0.9,0.5;<base>)
//! ```
//!
//! Transforms nest to any depth. `format(parse(s))` is the canonical form.

use std::fmt;

use crate::dist::{CountLaw, DistError, Kind, RadiusDistribution, SusceptProfile};

pub fn parse_dist(spec: &str) -> Result<RadiusDistribution, DistError> {
    let s = spec.trim();
    if let Some(rest) = s.strip_prefix("sparse(") {
        let (head, base) = split_transform(rest, s)?;
        let eps = parse_kv(head, "eps")?;
        return RadiusDistribution::sparse(parse_dist(base)?, eps);
    }
    if let Some(rest) = s.strip_prefix("pgf(") {
        let (head, base) = split_transform(rest, s)?;
        let count = parse_count_law(head)?;
        return RadiusDistribution::pgf(parse_dist(base)?, count);
    }
    if let Some(rest) = s.strip_prefix("suscept(") {
        let (head, base) = split_transform(rest, s)?;
        let profile = parse_profile(head)?;
        return RadiusDistribution::susceptible(parse_dist(base)?, profile);
    }
    let (name, args) = s
        .split_once(':')
        .ok_or_else(|| DistError::Parse(format!("missing ':' in `{s}`")))?;
    match name {
        "finite" => {
            let pmf = args
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| DistError::Parse(format!("bad probability `{t}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            RadiusDistribution::finite(&pmf)
        }
        "frac" => RadiusDistribution::frac(parse_kv(args, "c")?),
        "powratio" => RadiusDistribution::powratio(parse_kv(args, "a")?),
        "geomdefect" => {
            let kv = parse_kvs(args)?;
            RadiusDistribution::geomdefect(get(&kv, "C", s)?, get(&kv, "r", s)?)
        }
        "harmonic" => {
            let kv = parse_kvs(args)?;
            let alpha0 = kv.iter().find(|(k, _)| k == "alpha0").map(|(_, v)| *v);
            RadiusDistribution::harmonic(get(&kv, "r", s)?, alpha0)
        }
        _ => Err(DistError::Parse(format!("unknown family `{name}`"))),
    }
}

/// Split `head;base)` — the base may itself contain nested parentheses.
fn split_transform<'a>(rest: &'a str, whole: &str) -> Result<(&'a str, &'a str), DistError> {
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| DistError::Parse(format!("unbalanced parentheses in `{whole}`")))?;
    let semi = inner
        .find(';')
        .ok_or_else(|| DistError::Parse(format!("transform needs `;<base>` in `{whole}`")))?;
    Ok((&inner[..semi], &inner[semi + 1..]))
}

fn parse_kvs(args: &str) -> Result<Vec<(String, f64)>, DistError> {
    args.split(',')
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| DistError::Parse(format!("expected key=value, got `{pair}`")))?;
            let v = v
                .trim()
                .parse::<f64>()
                .map_err(|_| DistError::Parse(format!("bad number `{v}`")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn get(kv: &[(String, f64)], key: &str, ctx: &str) -> Result<f64, DistError> {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| DistError::Parse(format!("missing `{key}=` in `{ctx}`")))
}

fn parse_kv(args: &str, key: &str) -> Result<f64, DistError> {
    get(&parse_kvs(args)?, key, args)
}

fn parse_count_law(head: &str) -> Result<CountLaw, DistError> {
    if let Some(args) = head.strip_prefix("geom1:") {
        return Ok(CountLaw::Geom1(parse_kv(args, "p")?));
    }
    if let Some(args) = head.strip_prefix("const:") {
        let m = args
            .trim()
            .parse::<u64>()
            .map_err(|_| DistError::Parse(format!("bad count `{args}`")))?;
        return Ok(CountLaw::Const(m));
    }
    Err(DistError::Parse(format!("unknown count law `{head}`")))
}

fn parse_profile(head: &str) -> Result<SusceptProfile, DistError> {
    if head == "recip" {
        return Ok(SusceptProfile::Recip);
    }
    if let Some(args) = head.strip_prefix("const:") {
        let p = args
            .trim()
            .parse::<f64>()
            .map_err(|_| DistError::Parse(format!("bad probability `{args}`")))?;
        return Ok(SusceptProfile::Const(p));
    }
    if let Some(args) = head.strip_prefix("seq:") {
        let v = args
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| DistError::Parse(format!("bad probability `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(SusceptProfile::Seq(v));
    }
    Err(DistError::Parse(format!(
        "unknown susceptibility profile `{head}`"
    )))
}

impl fmt::Display for RadiusDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
                Kind::Finite { pmf, .. } => {
                    write!(f, "finite:")?;
                    for (i, p) in pmf.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{p}")?;
                    }
                    Ok(())
                }
                Kind::Frac { c } => write!(f, "frac:c={c}"),
                Kind::PowRatio { a } => write!(f, "powratio:a={a}"),
                Kind::GeomDefect { coeff, ratio } => write!(f, "geomdefect:C={coeff},r={ratio}"),
                Kind::Harmonic { r, alpha0 } => write!(f, "harmonic:r={r},alpha0={alpha0}"),
                Kind::Sparse { base, eps } => write!(f, "sparse(eps={eps};{base})"),
                Kind::Pgf { base, count } => match count {
                    CountLaw::Const(m) => write!(f, "pgf(const:{m};{base})"),
                    CountLaw::Geom1(p) => write!(f, "pgf(geom1:p={p};{base})"),
                },
                Kind::Suscept { base, profile } => match profile {
                    SusceptProfile::Const(p) => write!(f, "suscept(const:{p};{base})"),
                    SusceptProfile::Recip => write!(f, "suscept(recip;{base})"),
                    SusceptProfile::Seq(v) => {
                        write!(f, "suscept(seq:")?;
                        for (i, p) in v.iter().enumerate() {
                            if i > 0 {
                                write!(f, ",")?;
                            }
                            write!(f, "{p}")?;
                        }
                        write!(f, ";{base})")
                    }
                },
        }
    }
}
