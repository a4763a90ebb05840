//! Input resolution: subgroup labels or table files, representation and form
//! specifications, the memoized coset-table cache, and input fingerprints
//! for reports.
//!
//! A specification that names an existing file, contains a path separator,
//! or ends in ".json" is read as a schema document; anything else is parsed
//! as a label. Cached coset tables live under the directory named by the
//! VVAF_LIFT_CACHE environment variable and are revalidated against a fresh
//! enumeration on every load, so a stale cache entry is an error rather than
//! a silently wrong answer.

use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use vvaf_lift::error::{Error, Result};
use vvaf_lift::io;
use vvaf_lift::lift::VVAF;
use vvaf_lift::rep::{AmbientRep, SubgroupRep};
use vvaf_lift::subgroup::{enumerate, CosetSystem, Subgroup, DEFAULT_MAX_INDEX};

fn looks_like_path(spec: &str) -> bool {
    spec.ends_with(".json") || spec.contains('/') || Path::new(spec).exists()
}

fn read_text(path: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {}", path, e)))
}

pub fn load_subgroup(spec: &str) -> Result<Subgroup> {
    if looks_like_path(spec) {
        io::subgroup_from_json(&io::parse(&read_text(spec)?)?)
    } else {
        io::parse_subgroup_label(spec)
    }
}

fn cache_path(spec: &str) -> Option<PathBuf> {
    let dir = std::env::var_os("VVAF_LIFT_CACHE")?;
    let mut h = Sha256::new();
    h.update(spec.as_bytes());
    let digest = h.finalize();
    let mut tag = String::new();
    for b in &digest[..8] {
        tag.push_str(&format!("{:02x}", b));
    }
    Some(Path::new(&dir).join(format!("plan-{}.json", tag)))
}

/// Enumerates the subgroup's cosets, going through the plan cache when one
/// is configured.
pub fn load_system(spec: &str) -> Result<Arc<CosetSystem>> {
    let path = cache_path(spec);
    if let Some(p) = &path {
        if let Ok(text) = std::fs::read_to_string(p) {
            let plan: io::LiftPlanJson = io::parse(&text)?;
            return io::lift_plan_from_json(&plan);
        }
    }
    let subgroup = load_subgroup(spec)?;
    let sys = Arc::new(enumerate(subgroup, DEFAULT_MAX_INDEX)?);
    if let Some(p) = &path {
        if let Some(dir) = p.parent() {
            let _ = std::fs::create_dir_all(dir);
        }
        let _ = std::fs::write(p, io::emit(&io::lift_plan_to_json(&sys)));
    }
    Ok(sys)
}

pub fn load_rep(spec: &str) -> Result<SubgroupRep> {
    if looks_like_path(spec) {
        return io::rep_from_json(&io::parse(&read_text(spec)?)?);
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["trivial"] => Ok(SubgroupRep::Restricted(AmbientRep::trivial(1))),
        ["defining"] => Ok(SubgroupRep::Restricted(AmbientRep::defining())),
        ["eta", e] => {
            let e: i64 = parse_int(e, spec)?;
            Ok(SubgroupRep::Restricted(AmbientRep::eta_character(e)))
        }
        ["eta-ratio", level, power] => {
            let level: u32 = parse_int(level, spec)?;
            let power: i64 = parse_int(power, spec)?;
            Ok(SubgroupRep::EtaRatio { level, power })
        }
        _ => Err(Error::InvalidInput(format!(
            "unknown representation {:?}; expected trivial, defining, eta:E, \
             eta-ratio:LEVEL:POWER, or a JSON path",
            spec
        ))),
    }
}

/// Builds or loads a form on its natural coset system; the given system is
/// only consumed by constant-one, whose expansion data depends on it.
pub fn build_form(
    spec: &str,
    sys: &Arc<CosetSystem>,
    weight: Option<i64>,
    trunc: i64,
) -> Result<VVAF> {
    let form = if looks_like_path(spec) {
        io::vvaf_from_json(&io::parse(&read_text(spec)?)?)?
    } else {
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            ["tau-one"] => VVAF::tau_one(weight.unwrap_or(0), trunc)?,
            ["constant-one"] => VVAF::constant_one(sys.clone(), trunc)?,
            ["eta-ratio", level, power] => {
                let level: u32 = parse_int(level, spec)?;
                let power: i64 = parse_int(power, spec)?;
                VVAF::eta_ratio_form(level, power, trunc)?
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown form {:?}; expected tau-one, constant-one, \
                     eta-ratio:LEVEL:POWER, or a JSON path",
                    spec
                )))
            }
        }
    };
    if let Some(k) = weight {
        if k != form.weight {
            return Err(Error::InvalidInput(format!(
                "requested weight {} but the form {} has weight {}",
                k, spec, form.weight
            )));
        }
    }
    Ok(form)
}

/// Moves a form onto the requested coset system, restricting from the full
/// group when needed. A form already living on a different proper subgroup
/// is a hard mismatch.
pub fn align_form(form: VVAF, sys: &Arc<CosetSystem>) -> Result<VVAF> {
    let want = io::emit(&io::lift_plan_to_json(sys));
    let have = io::emit(&io::lift_plan_to_json(&form.sys));
    if want == have {
        return Ok(form);
    }
    if form.sys.index() == 1 {
        return form.restrict(sys.clone());
    }
    Err(Error::Inconsistent(
        "the form lives on a different subgroup than the one requested".into(),
    ))
}

/// Builds or loads a form and moves it onto the requested coset system.
pub fn load_form(
    spec: &str,
    sys: &Arc<CosetSystem>,
    weight: Option<i64>,
    trunc: i64,
) -> Result<VVAF> {
    align_form(build_form(spec, sys, weight, trunc)?, sys)
}

/// Input fingerprint recorded in reports: file contents hash to
/// "sha256:...", labels are recorded verbatim.
pub fn fingerprint(spec: &str) -> String {
    if !looks_like_path(spec) {
        return spec.to_string();
    }
    match std::fs::read(spec) {
        Ok(bytes) => {
            let mut h = Sha256::new();
            h.update(&bytes);
            let digest = h.finalize();
            let mut out = String::from("sha256:");
            for b in digest {
                out.push_str(&format!("{:02x}", b));
            }
            out
        }
        Err(_) => format!("unreadable:{}", spec),
    }
}

fn parse_int<T: std::str::FromStr>(field: &str, spec: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("malformed number {:?} in {:?}", field, spec)))
}
