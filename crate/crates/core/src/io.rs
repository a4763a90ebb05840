//! JSON schemas for every persisted object: scalars, matrices,
//! representations, subgroups, expansions, forms, lift plans, spectrum
//! reports, and verification verdicts.
//!
//! Conventions. Exact rationals serialize as strings "p/q" (bare "p" for
//! integers) so no value passes through floating point; cyclotomic numbers
//! as {order, coeffs} with rational-string coefficients over the power
//! basis; complex floats as [re, im] decimal strings with 17 significant
//! digits, which reparse to the identical bits. 2x2 integral matrices are
//! 4-element arrays [a, b, c, d] of rational strings.
//!
//! Every document round-trips: parsing what was emitted reproduces the
//! original value, with parse-side validation run again (representation
//! relations, coset-table axioms, expansion consistency), so a hand-edited
//! file cannot smuggle in inconsistent data.
//!
//! Emission is deterministic: struct fields have fixed order, maps are
//! sorted, and channel/coefficient lists are emitted in ascending key
//! order, so identical inputs produce byte-identical documents.

use crate::cmat::SMat;
use crate::error::{Error, Result};
use crate::induction::{CuspSpectrum, SpectrumCheck};
use crate::lift::{LiftedVVAF, VVAF};
use crate::qseries::LogQSeries;
use crate::rep::{AmbientRep, EigenClass, SubgroupRep};
use crate::scalar::{format_rational, parse_rational, CycQ, Scalar};
use crate::sl2::{ExtendedPoint, Mat2};
use crate::subgroup::{enumerate, CosetAction, CosetSystem, Subgroup, DEFAULT_MAX_INDEX};
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::{One, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A float as a decimal string with 17 significant digits; reparsing
/// recovers the exact bits.
pub fn f17(x: f64) -> String {
    format!("{:.16e}", x)
}

pub fn parse_f17(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidInput(format!("malformed float literal {:?}", s)))
}

fn rational_from_str(s: &str) -> Result<BigRational> {
    parse_rational(s)
        .ok_or_else(|| Error::InvalidInput(format!("malformed rational literal {:?}", s)))
}

/// One exact or floating scalar. A bare string is a rational, a 2-array a
/// complex float, an object a cyclotomic integer combination.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum ScalarJson {
    Rational(String),
    Complex([String; 2]),
    Cyclotomic { order: u32, coeffs: Vec<String> },
}

pub fn scalar_to_json(s: &Scalar) -> ScalarJson {
    match s {
        Scalar::Exact(c) => {
            if c.order() == 1 {
                let r = c.coeffs().first().cloned().unwrap_or_else(BigRational::zero);
                ScalarJson::Rational(format_rational(&r))
            } else {
                ScalarJson::Cyclotomic {
                    order: c.order(),
                    coeffs: c.coeffs().iter().map(format_rational).collect(),
                }
            }
        }
        Scalar::Float(z) => ScalarJson::Complex([f17(z.re), f17(z.im)]),
    }
}

pub fn scalar_from_json(j: &ScalarJson) -> Result<Scalar> {
    match j {
        ScalarJson::Rational(s) => Ok(Scalar::from_rational(rational_from_str(s)?)),
        ScalarJson::Complex([re, im]) => Ok(Scalar::from_complex(Complex64::new(
            parse_f17(re)?,
            parse_f17(im)?,
        ))),
        ScalarJson::Cyclotomic { order, coeffs } => {
            let cs = coeffs
                .iter()
                .map(|c| rational_from_str(c))
                .collect::<Result<Vec<_>>>()?;
            let c = CycQ::from_parts(*order, cs).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "cyclotomic value of order {} rejected (order bound or coefficient count)",
                    order
                ))
            })?;
            Ok(Scalar::Exact(c))
        }
    }
}

/// [a, b, c, d] as rational strings, row-major.
pub type Mat2Json = [String; 4];

pub fn mat2_to_json(m: &Mat2) -> Mat2Json {
    [
        format_rational(&m.a),
        format_rational(&m.b),
        format_rational(&m.c),
        format_rational(&m.d),
    ]
}

pub fn mat2_from_json(j: &Mat2Json) -> Result<Mat2> {
    Ok(Mat2::new(
        rational_from_str(&j[0])?,
        rational_from_str(&j[1])?,
        rational_from_str(&j[2])?,
        rational_from_str(&j[3])?,
    ))
}

pub fn smat_to_json(m: &SMat) -> Vec<Vec<ScalarJson>> {
    (0..m.rows)
        .map(|i| (0..m.cols).map(|j| scalar_to_json(&m[(i, j)])).collect())
        .collect()
}

pub fn smat_from_json(rows: &[Vec<ScalarJson>]) -> Result<SMat> {
    let r = rows.len();
    let c = rows.first().map(Vec::len).unwrap_or(0);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidInput(
            "matrix rows must be nonempty and of equal length".into(),
        ));
    }
    let mut m = SMat::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = scalar_from_json(e)?;
        }
    }
    Ok(m)
}

/// A representation, by ambient generator images or by named family.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationJson {
    /// Images of T and S; validated against the group relations on parse.
    Generators {
        dimension: usize,
        t: Vec<Vec<ScalarJson>>,
        s: Vec<Vec<ScalarJson>>,
    },
    /// Character of the eta quotient (eta(tau)/eta(level tau))^(2 power).
    EtaRatio { level: u32, power: i64 },
    /// base tensored with nu^nu_power, nu the eta-square multiplier.
    Twisted {
        base: Box<RepresentationJson>,
        nu_power: i64,
    },
}

pub fn rep_to_json(rep: &SubgroupRep) -> RepresentationJson {
    match rep {
        SubgroupRep::Restricted(a) => RepresentationJson::Generators {
            dimension: a.dim(),
            t: smat_to_json(a.t_image()),
            s: smat_to_json(a.s_image()),
        },
        SubgroupRep::EtaRatio { level, power } => RepresentationJson::EtaRatio {
            level: *level,
            power: *power,
        },
        SubgroupRep::Twisted { base, nu_power } => RepresentationJson::Twisted {
            base: Box::new(rep_to_json(base)),
            nu_power: *nu_power,
        },
    }
}

pub fn rep_from_json(j: &RepresentationJson) -> Result<SubgroupRep> {
    match j {
        RepresentationJson::Generators { dimension, t, s } => {
            let t = smat_from_json(t)?;
            let s = smat_from_json(s)?;
            if t.rows != *dimension {
                return Err(Error::InvalidInput(format!(
                    "declared dimension {} does not match generator size {}",
                    dimension, t.rows
                )));
            }
            Ok(SubgroupRep::Restricted(AmbientRep::from_images(t, s)?))
        }
        RepresentationJson::EtaRatio { level, power } => {
            if *level != 2 && *level != 3 {
                return Err(Error::InvalidInput(
                    "eta-ratio characters are defined for levels 2 and 3".into(),
                ));
            }
            Ok(SubgroupRep::EtaRatio {
                level: *level,
                power: *power,
            })
        }
        RepresentationJson::Twisted { base, nu_power } => {
            Ok(rep_from_json(base)?.twist_nu(*nu_power))
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct TableJson {
    pub t: Vec<usize>,
    pub s: Vec<usize>,
}

/// A subgroup: named congruence family or explicit coset action.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum SubgroupJson {
    Family {
        family: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        level: Option<u32>,
    },
    Table { table: TableJson },
}

pub fn subgroup_to_json(h: &Subgroup) -> SubgroupJson {
    let (family, level) = match h {
        Subgroup::Full => ("full", None),
        Subgroup::Gamma0(n) => ("gamma0", Some(*n)),
        Subgroup::Gamma1(n) => ("gamma1", Some(*n)),
        Subgroup::Principal(n) => ("principal", Some(*n)),
        Subgroup::Table(act) => {
            return SubgroupJson::Table {
                table: TableJson {
                    t: act.t_table().to_vec(),
                    s: act.s_table().to_vec(),
                },
            }
        }
    };
    SubgroupJson::Family {
        family: family.into(),
        level,
    }
}

pub fn subgroup_from_json(j: &SubgroupJson) -> Result<Subgroup> {
    match j {
        SubgroupJson::Family { family, level } => {
            let need_level = || {
                level.filter(|&n| n > 0).ok_or_else(|| {
                    Error::InvalidInput(format!("family {:?} requires a positive level", family))
                })
            };
            match family.as_str() {
                "full" => Ok(Subgroup::Full),
                "gamma0" => Ok(Subgroup::Gamma0(need_level()?)),
                "gamma1" => Ok(Subgroup::Gamma1(need_level()?)),
                "principal" => Ok(Subgroup::Principal(need_level()?)),
                other => Err(Error::InvalidInput(format!(
                    "unknown subgroup family {:?} (expected full, gamma0, gamma1, principal)",
                    other
                ))),
            }
        }
        SubgroupJson::Table { table } => Ok(Subgroup::Table(CosetAction::new(
            table.t.clone(),
            table.s.clone(),
        )?)),
    }
}

/// Parses a subgroup command-line label: "full", "gamma0:2", "gamma1:3",
/// "principal:2".
pub fn parse_subgroup_label(label: &str) -> Result<Subgroup> {
    let (family, level) = match label.split_once(':') {
        Some((f, l)) => {
            let n: u32 = l.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("malformed level in subgroup label {:?}", label))
            })?;
            (f.trim(), Some(n))
        }
        None => (label.trim(), None),
    };
    subgroup_from_json(&SubgroupJson::Family {
        family: family.to_ascii_lowercase(),
        level,
    })
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CoeffJson {
    pub n: i64,
    pub value: Vec<ScalarJson>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ChannelJson {
    pub mu: String,
    pub logpow: u32,
    pub coeffs: Vec<CoeffJson>,
}

/// A logarithmic q-expansion: terms grouped by (exponent class, log power),
/// ascending.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SeriesJson {
    pub period: String,
    pub dim: usize,
    pub valid_to: String,
    pub channels: Vec<ChannelJson>,
}

pub fn series_to_json(s: &LogQSeries) -> SeriesJson {
    let mut grouped: BTreeMap<(BigRational, u32), Vec<CoeffJson>> = BTreeMap::new();
    for (mu, jp, n, c) in s.terms() {
        grouped.entry((mu.clone(), jp)).or_default().push(CoeffJson {
            n,
            value: c.iter().map(scalar_to_json).collect(),
        });
    }
    let channels = grouped
        .into_iter()
        .map(|((mu, logpow), mut coeffs)| {
            coeffs.sort_by_key(|c| c.n);
            ChannelJson {
                mu: format_rational(&mu),
                logpow,
                coeffs,
            }
        })
        .collect();
    SeriesJson {
        period: format_rational(s.period()),
        dim: s.dim(),
        valid_to: format_rational(s.valid_to()),
        channels,
    }
}

pub fn series_from_json(j: &SeriesJson) -> Result<LogQSeries> {
    let period = rational_from_str(&j.period)?;
    if period <= BigRational::zero() {
        return Err(Error::InvalidInput("series period must be positive".into()));
    }
    let valid_to = rational_from_str(&j.valid_to)?;
    let mut s = LogQSeries::zero(period, j.dim, valid_to);
    for ch in &j.channels {
        let mu = rational_from_str(&ch.mu)?;
        if mu < BigRational::zero() || mu >= BigRational::one() {
            return Err(Error::InvalidInput(format!(
                "exponent class {} outside [0, 1)",
                ch.mu
            )));
        }
        for co in &ch.coeffs {
            if co.value.len() != j.dim {
                return Err(Error::InvalidInput(format!(
                    "coefficient at n = {} has {} entries, series dimension is {}",
                    co.n,
                    co.value.len(),
                    j.dim
                )));
            }
            let x = BigRational::from_integer(co.n.into()) + &mu;
            let value = co
                .value
                .iter()
                .map(scalar_from_json)
                .collect::<Result<Vec<_>>>()?;
            s.add_term(&x, ch.logpow, value);
        }
    }
    Ok(s)
}

/// A form: weight, subgroup, representation, one expansion per cusp class.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct VvafJson {
    pub weight: i64,
    pub subgroup: SubgroupJson,
    pub representation: RepresentationJson,
    pub cusp_series: Vec<SeriesJson>,
}

pub fn vvaf_to_json(x: &VVAF) -> VvafJson {
    VvafJson {
        weight: x.weight,
        subgroup: subgroup_to_json(&x.sys.subgroup),
        representation: rep_to_json(&x.rep),
        cusp_series: x.cusp_series.iter().map(series_to_json).collect(),
    }
}

/// Rebuilds the form, re-running enumeration and the translation-equation
/// validation.
pub fn vvaf_from_json(j: &VvafJson) -> Result<VVAF> {
    let subgroup = subgroup_from_json(&j.subgroup)?;
    let sys = Arc::new(enumerate(subgroup, DEFAULT_MAX_INDEX)?);
    let rep = rep_from_json(&j.representation)?;
    let series = j
        .cusp_series
        .iter()
        .map(series_from_json)
        .collect::<Result<Vec<_>>>()?;
    VVAF::new(j.weight, rep, sys, series)
}

pub fn point_to_json(p: &ExtendedPoint) -> String {
    match p.to_rational() {
        None => "oo".into(),
        Some(r) => format_rational(&r),
    }
}

pub fn point_from_json(s: &str) -> Result<ExtendedPoint> {
    if s.trim() == "oo" {
        return Ok(ExtendedPoint::infinity());
    }
    Ok(ExtendedPoint::from_fraction(
        &rational_from_str(s)?,
        &BigRational::one(),
    ))
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CuspJson {
    pub point: String,
    pub width: u32,
    pub scaling: Mat2Json,
    pub stabilizer: Mat2Json,
    pub offset: usize,
}

/// Component provenance: which cusp class and which affine shift.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ComponentJson {
    pub cusp: usize,
    pub shift: u32,
}

/// The combinatorial lifting data for the ambient infinite cusp: cusp
/// classes with widths and scaling matrices, flat coset representatives,
/// and the affine shift constants of the conjugate expansions.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LiftPlanJson {
    pub subgroup: SubgroupJson,
    pub ambient_cusp: String,
    pub index: usize,
    pub cusps: Vec<CuspJson>,
    pub representatives: Vec<Mat2Json>,
    pub components: Vec<ComponentJson>,
}

pub fn lift_plan_to_json(sys: &CosetSystem) -> LiftPlanJson {
    LiftPlanJson {
        subgroup: subgroup_to_json(&sys.subgroup),
        ambient_cusp: "oo".into(),
        index: sys.index(),
        cusps: sys
            .cusps
            .iter()
            .map(|c| CuspJson {
                point: point_to_json(&c.point),
                width: c.width,
                scaling: mat2_to_json(&c.scaling),
                stabilizer: mat2_to_json(&c.stabilizer),
                offset: c.offset,
            })
            .collect(),
        representatives: sys.reps.iter().map(mat2_to_json).collect(),
        components: sys
            .block_of
            .iter()
            .map(|&(cusp, shift)| ComponentJson {
                cusp,
                shift: shift as u32,
            })
            .collect(),
    }
}

/// Re-enumerates the subgroup and checks the stored plan against the
/// canonical one, so an edited document cannot introduce a divergent plan.
pub fn lift_plan_from_json(j: &LiftPlanJson) -> Result<Arc<CosetSystem>> {
    if j.ambient_cusp.trim() != "oo" {
        return Err(Error::InvalidInput(
            "only the infinite ambient cusp is supported".into(),
        ));
    }
    let subgroup = subgroup_from_json(&j.subgroup)?;
    let sys = Arc::new(enumerate(subgroup, DEFAULT_MAX_INDEX)?);
    let canonical = lift_plan_to_json(&sys);
    if canonical != *j {
        return Err(Error::Inconsistent(
            "stored lift plan differs from the canonical enumeration of its subgroup".into(),
        ));
    }
    Ok(sys)
}

/// A lifted form with provenance: the ambient-group form, the plan it was
/// assembled through, and the source it lifts.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct LiftedVvafJson {
    pub form: VvafJson,
    pub plan: LiftPlanJson,
    pub source: VvafJson,
}

pub fn lifted_to_json(l: &LiftedVVAF) -> LiftedVvafJson {
    LiftedVvafJson {
        form: vvaf_to_json(&l.form),
        plan: lift_plan_to_json(&l.ind.sys),
        source: vvaf_to_json(&l.source),
    }
}

/// Re-assembles the lift from its stored source and checks that the stored
/// ambient form is the one the assembly produces.
pub fn lifted_from_json(j: &LiftedVvafJson) -> Result<LiftedVVAF> {
    lift_plan_from_json(&j.plan)?;
    let source = vvaf_from_json(&j.source)?;
    let lifted = LiftedVVAF::assemble_lift(&source)?;
    let stored = vvaf_to_json(&lifted.form);
    if stored != j.form {
        return Err(Error::Inconsistent(
            "stored lifted form does not match re-assembly from its source".into(),
        ));
    }
    Ok(lifted)
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ClassJson {
    /// Exact exponent "p/q" with value e^(2 pi i p/q), when recognized.
    pub exponent: Option<String>,
    pub value: [String; 2],
    pub block_sizes: Vec<usize>,
}

fn eigen_class_to_json(c: &EigenClass) -> ClassJson {
    let v = c.value.to_complex();
    ClassJson {
        exponent: c.exponent.as_ref().map(format_rational),
        value: [f17(v.re), f17(v.im)],
        block_sizes: c.block_sizes.clone(),
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CuspSpectrumJson {
    pub cusp: usize,
    pub width: u32,
    pub classes: Vec<ClassJson>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SpectrumCheckJson {
    pub cusp: usize,
    pub matched: bool,
    pub detail: String,
    pub computed: Vec<ClassJson>,
}

/// Predicted spectra per cusp and the comparison against the companion
/// blocks' computed Jordan structures.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SpectrumReportJson {
    pub predicted: Vec<CuspSpectrumJson>,
    pub checks: Vec<SpectrumCheckJson>,
    pub pass: bool,
}

pub fn spectrum_report_to_json(
    predicted: &[CuspSpectrum],
    checks: &[SpectrumCheck],
) -> SpectrumReportJson {
    let predicted = predicted
        .iter()
        .map(|p| CuspSpectrumJson {
            cusp: p.cusp,
            width: p.width,
            classes: p
                .classes
                .iter()
                .map(|c| ClassJson {
                    exponent: c.exponent.as_ref().map(format_rational),
                    value: [f17(c.value.re), f17(c.value.im)],
                    block_sizes: c.block_sizes.clone(),
                })
                .collect(),
        })
        .collect();
    let checks: Vec<SpectrumCheckJson> = checks
        .iter()
        .map(|c| SpectrumCheckJson {
            cusp: c.cusp,
            matched: c.matched,
            detail: c.detail.clone(),
            computed: c.computed.classes.iter().map(eigen_class_to_json).collect(),
        })
        .collect();
    let pass = checks.iter().all(|c| c.matched);
    SpectrumReportJson {
        predicted,
        checks,
        pass,
    }
}

/// Outcome of one named check inside a verdict document.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub pass: bool,
    pub max_residual: String,
    pub tolerance: String,
    pub samples: usize,
}

/// The persisted verification verdict: per-check outcomes, environment
/// fingerprint, input hashes, and the sampling/truncation parameters that
/// make the document reproducible.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct VerdictReport {
    pub environment: String,
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub truncation: i64,
    pub checks: BTreeMap<String, CheckOutcome>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl VerdictReport {
    pub fn new(seed: u64, truncation: i64) -> VerdictReport {
        VerdictReport {
            environment: format!(
                "{} {}",
                env!("CARGO_PKG_NAME"),
                env!("CARGO_PKG_VERSION")
            ),
            inputs: BTreeMap::new(),
            seed,
            truncation,
            checks: BTreeMap::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    pub fn record(&mut self, name: &str, pass: bool, max_residual: f64, tol: f64, samples: usize) {
        self.checks.insert(
            name.into(),
            CheckOutcome {
                pass,
                max_residual: f17(max_residual),
                tolerance: f17(tol),
                samples,
            },
        );
        self.pass &= pass;
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

/// Serializes any schema value as pretty JSON with a trailing newline.
pub fn emit<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("schema types always serialize");
    s.push('\n');
    s
}

/// Parses a schema value, mapping syntax errors to input errors.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed JSON: {}", e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::eta_power_series;
    use crate::scalar::{rat, rat_int};

    fn roundtrip_scalar(s: &Scalar) {
        let j = scalar_to_json(s);
        let text = emit(&j);
        let back: ScalarJson = parse(&text).unwrap();
        assert_eq!(back, j);
        let v = scalar_from_json(&back).unwrap();
        assert_eq!(v.is_exact(), s.is_exact());
        assert!(v.approx_eq(s, 0.0), "{:?} vs {:?}", v, s);
    }

    #[test]
    fn scalars_roundtrip() {
        roundtrip_scalar(&Scalar::from_rational(rat(-7, 3)));
        roundtrip_scalar(&Scalar::from_int(0));
        roundtrip_scalar(&Scalar::root_of_unity(&rat(5, 24)));
        roundtrip_scalar(&Scalar::from_complex(Complex64::new(
            -0.123456789012345678,
            3.5e-300,
        )));
        let z = Scalar::from_complex(Complex64::new(1.0 / 3.0, -2.0f64.sqrt()));
        roundtrip_scalar(&z);
    }

    #[test]
    fn float_literals_roundtrip_to_identical_bits() {
        for &x in &[0.0, -0.0, 1.0 / 3.0, 6.02e23, -2.2250738585072014e-308] {
            let y = parse_f17(&f17(x)).unwrap();
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn matrices_roundtrip() {
        let m = Mat2::from_i64(2, -3, 5, 7);
        let back = mat2_from_json(&mat2_to_json(&m)).unwrap();
        assert_eq!(back, m);
        let rep = AmbientRep::defining().twist(&AmbientRep::eta_character(5));
        let t = smat_from_json(&smat_to_json(rep.t_image())).unwrap();
        assert!(t.approx_eq(rep.t_image(), 0.0));
    }

    #[test]
    fn representations_roundtrip_with_validation() {
        let reps = [
            SubgroupRep::Restricted(AmbientRep::defining().twist(&AmbientRep::eta_character(1))),
            SubgroupRep::EtaRatio { level: 2, power: 3 },
            SubgroupRep::EtaRatio { level: 3, power: -2 }.twist_nu(5),
        ];
        for rep in &reps {
            let j = rep_to_json(rep);
            let text = emit(&j);
            let back = rep_from_json(&parse(&text).unwrap()).unwrap();
            for g in [Mat2::t_pow(4), Mat2::from_i64(1, 0, 2, 1)] {
                if let (Ok(a), Ok(b)) = (rep.evaluate(&g), back.evaluate(&g)) {
                    assert!(a.approx_eq(&b, 0.0));
                }
            }
        }
        // A generator pair violating S^4 = 1 is rejected at parse time.
        let bad = RepresentationJson::Generators {
            dimension: 1,
            t: vec![vec![ScalarJson::Rational("1".into())]],
            s: vec![vec![ScalarJson::Rational("2".into())]],
        };
        assert!(rep_from_json(&bad).is_err());
    }

    #[test]
    fn subgroups_roundtrip() {
        for h in [Subgroup::Full, Subgroup::Gamma0(2), Subgroup::Principal(2)] {
            let j = subgroup_to_json(&h);
            let back = subgroup_from_json(&parse(&emit(&j)).unwrap()).unwrap();
            assert_eq!(subgroup_to_json(&back), j);
        }
        let table = Subgroup::Table(CosetAction::new(vec![0, 2, 1], vec![1, 0, 2]).unwrap());
        let j = subgroup_to_json(&table);
        let back = subgroup_from_json(&j).unwrap();
        assert_eq!(subgroup_to_json(&back), j);
        assert!(matches!(
            parse_subgroup_label("gamma0:2").unwrap(),
            Subgroup::Gamma0(2)
        ));
        assert!(parse_subgroup_label("gamma9:1").is_err());
        assert!(parse_subgroup_label("gamma0:x").is_err());
    }

    #[test]
    fn series_roundtrip_exact_and_float() {
        let eta2 = eta_power_series(2, 16).unwrap();
        let j = series_to_json(&eta2);
        let back = series_from_json(&parse(&emit(&j)).unwrap()).unwrap();
        assert!(back.sub(&eta2).unwrap().is_zero());
        assert_eq!(back.period(), eta2.period());
        assert_eq!(back.valid_to(), eta2.valid_to());
        assert!(back.is_exact());

        let floaty = eta2.scale(&Scalar::from_complex(Complex64::new(0.3, -1.7)));
        let back = series_from_json(&series_to_json(&floaty)).unwrap();
        for (mu, jp, n, c) in floaty.terms() {
            let b = back.coeff(mu, jp, n).unwrap();
            for (x, y) in c.iter().zip(b) {
                assert_eq!(x.to_complex(), y.to_complex());
            }
        }
    }

    #[test]
    fn forms_roundtrip_through_validation() {
        let x = VVAF::eta_ratio_form(2, 3, 20).unwrap();
        let j = vvaf_to_json(&x);
        let back = vvaf_from_json(&parse(&emit(&j)).unwrap()).unwrap();
        assert_eq!(back.weight, x.weight);
        assert_eq!(vvaf_to_json(&back), j);

        let y = VVAF::tau_one(0, 12).unwrap();
        let jy = vvaf_to_json(&y);
        let back = vvaf_from_json(&jy).unwrap();
        assert_eq!(vvaf_to_json(&back), jy);
    }

    #[test]
    fn lift_plan_roundtrips_and_rejects_divergence() {
        let sys = Arc::new(enumerate(Subgroup::Gamma0(2), DEFAULT_MAX_INDEX).unwrap());
        let j = lift_plan_to_json(&sys);
        assert_eq!(j.index, 3);
        assert_eq!(j.components.len(), 3);
        let back = lift_plan_from_json(&parse(&emit(&j)).unwrap()).unwrap();
        assert_eq!(lift_plan_to_json(&back), j);

        let mut tampered = j.clone();
        tampered.cusps[1].width = 7;
        assert!(lift_plan_from_json(&tampered).is_err());
    }

    #[test]
    fn lifted_forms_roundtrip_via_reassembly() {
        let x = VVAF::eta_ratio_form(2, 3, 20).unwrap();
        let l = LiftedVVAF::assemble_lift(&x).unwrap();
        let j = lifted_to_json(&l);
        let back = lifted_from_json(&parse(&emit(&j)).unwrap()).unwrap();
        assert_eq!(lifted_to_json(&back), j);

        let mut tampered = j.clone();
        tampered.form.weight += 1;
        assert!(lifted_from_json(&tampered).is_err());
    }

    #[test]
    fn verdicts_are_deterministic_and_roundtrip() {
        let mut v = VerdictReport::new(7, 50);
        v.inputs.insert("form".into(), "abc123".into());
        v.record("interleaving", true, 0.0, 1e-12, 63);
        v.record("oracle", true, 3.25e-9, 1e-8, 10);
        v.note("truncation-limited precision below n = 8");
        let a = emit(&v);
        let b = emit(&v);
        assert_eq!(a, b);
        let back: VerdictReport = parse(&a).unwrap();
        assert_eq!(back, v);
        assert!(back.pass);

        let mut w = back.clone();
        w.record("vanishing", false, 2.0e-4, 1e-9, 5);
        assert!(!w.pass);
    }

    #[test]
    fn malformed_documents_are_input_errors() {
        assert!(matches!(
            parse::<VvafJson>("{not json"),
            Err(Error::InvalidInput(_))
        ));
        assert!(rational_from_str("1/0").is_err());
        assert!(parse_f17("wat").is_err());
        let bad = SeriesJson {
            period: "1".into(),
            dim: 1,
            valid_to: "4".into(),
            channels: vec![ChannelJson {
                mu: "3/2".into(),
                logpow: 0,
                coeffs: vec![CoeffJson {
                    n: 0,
                    value: vec![ScalarJson::Rational("1".into())],
                }],
            }],
        };
        assert!(series_from_json(&bad).is_err());
    }

    #[test]
    fn spectrum_reports_serialize() {
        use crate::induction::{predict_spectrum, verify_spectrum, InducedRep};
        use crate::rep::JordanOptions;
        let sys = Arc::new(enumerate(Subgroup::Gamma0(2), DEFAULT_MAX_INDEX).unwrap());
        let ind = InducedRep::new(sys, SubgroupRep::Restricted(AmbientRep::trivial(1)));
        let opts = JordanOptions::default();
        let pred = predict_spectrum(&ind, &opts).unwrap();
        let checks = verify_spectrum(&ind, &opts).unwrap();
        let report = spectrum_report_to_json(&pred, &checks);
        assert!(report.pass);
        let exps: Vec<Option<String>> = report
            .predicted
            .iter()
            .flat_map(|c| c.classes.iter().map(|k| k.exponent.clone()))
            .collect();
        assert!(exps.contains(&Some("1/2".into())));
        let back: SpectrumReportJson = parse(&emit(&report)).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn exponent_classes_reduce_on_parse() {
        // add_term normalizes absolute exponents, so a document's (mu, n)
        // split is reproduced on emission.
        let mut s = LogQSeries::zero(rat_int(2), 1, rat_int(6));
        s.add_term(&rat(7, 2), 0, vec![Scalar::from_int(4)]);
        let j = series_to_json(&s);
        assert_eq!(j.channels[0].mu, "1/2");
        assert_eq!(j.channels[0].coeffs[0].n, 3);
        let back = series_from_json(&j).unwrap();
        assert_eq!(series_to_json(&back), j);
    }
}
