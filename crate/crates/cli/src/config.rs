use std::path::Path;

use gaussflux::expr::{parse_rational, Expr};
use gaussflux::nullcurve::lift_weierstrass;
use gaussflux::periodsolver::IntervalOptions;
use gaussflux::{
    CircularDomain, Hole, NullData, Polynomial, RationalMap, SolveOptions, WeierstrassPair, C64,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One job, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
    /// One row of `n` reals per hole.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_offset")]
    pub boundary_offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<C64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Extra random points, drawn with `--seed`, added to rank checks.
    #[serde(default = "default_rank_samples")]
    pub rank_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deform: Option<DeformSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<IntervalSpec>,
}

fn default_resolution() -> usize {
    32
}

fn default_offset() -> f64 {
    0.02
}

fn default_rank_samples() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default)]
    pub holes: Vec<HoleSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleSpec {
    pub center: C64,
    pub radius: f64,
}

/// A rational map as an expression in `z` or as coefficient arrays
/// (ascending powers, complex entries as `[re, im]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalSpec {
    Expr(String),
    Coeffs {
        num: Vec<C64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        den: Option<Vec<C64>>,
    },
}

impl RationalSpec {
    pub fn to_map(&self) -> Result<RationalMap, CliError> {
        match self {
            RationalSpec::Expr(s) => {
                parse_rational(s).map_err(|e| CliError::Config(format!("{s:?}: {e}")))
            }
            RationalSpec::Coeffs { num, den } => {
                let den = den.clone().unwrap_or_else(|| vec![C64::new(1.0, 0.0)]);
                RationalMap::new(Polynomial::new(num.clone()), Polynomial::new(den))
                    .map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    Weierstrass { g: RationalSpec, phi3: RationalSpec },
    NullData { components: Vec<RationalSpec> },
    FlatClass { class: Vec<u8> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Conformality and Gauss-map residuals.
    pub residual: f64,
    /// Period and flux errors.
    pub period: f64,
    /// Loop closure of the integrated immersion.
    pub closure: f64,
    /// Verified residual of the interval constructions.
    pub interval: f64,
    /// Third relative singular value of a flat point cloud.
    pub flatness: f64,
    /// Pointwise distance between fields that should coincide.
    pub field_match: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-6,
            period: 1e-9,
            closure: 1e-8,
            interval: 1e-8,
            flatness: 1e-8,
            field_match: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeformKind {
    Associated,
    Flatten,
    Nonflatize,
    FluxIsotopy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformSpec {
    pub kind: DeformKind,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Parameter range; defaults to `[0, π/2]` for the associated family and `[0, 1]` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    /// Replace `h ≡ 1` by a null-curve multiplier before deforming.
    #[serde(default)]
    pub preprocess: bool,
    /// `φ₃` of the flat data being deformed by `nonflatize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi3: Option<RationalSpec>,
}

fn default_samples() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    #[serde(default)]
    pub representative: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Field dump written by `synthesize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// OBJ mesh on the grid given by `domain`, `resolution` and `boundary_offset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    Multiplier,
    Gg2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub kind: IntervalKind,
    /// Components of the path, as expressions in `s`.
    pub components: Vec<String>,
    /// Target of `∫ h f ds` (multiplier).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<C64>>,
    /// Weight `a(s)` (gg2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    /// Targets of `∫ g f a ds` and `∫ g² f a ds` (gg2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<[C64; 2]>,
    #[serde(default)]
    pub options: IntervalOptions,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self::from_json("{}").expect("empty config parses")
    }
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn domain(&self) -> Result<CircularDomain, CliError> {
        let holes = self
            .domain
            .holes
            .iter()
            .map(|h| Hole::new(h.center, h.radius))
            .collect();
        CircularDomain::new(holes).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn input(&self) -> Result<&InputSpec, CliError> {
        self.input
            .as_ref()
            .ok_or_else(|| CliError::Config("missing `input`".into()))
    }

    /// Rational null data for `weierstrass` and `null-data` inputs.
    pub fn null_data(&self, domain: &CircularDomain) -> Result<NullData, CliError> {
        match self.input()? {
            InputSpec::Weierstrass { g, phi3 } => {
                let pair = WeierstrassPair::new(g.to_map()?, phi3.to_map()?);
                lift_weierstrass(&pair, domain).map_err(|e| CliError::Config(e.to_string()))
            }
            InputSpec::NullData { components } => {
                let comps = components
                    .iter()
                    .map(RationalSpec::to_map)
                    .collect::<Result<Vec<_>, _>>()?;
                NullData::new(comps, domain.clone()).map_err(|e| CliError::Config(e.to_string()))
            }
            InputSpec::FlatClass { .. } => Err(CliError::Config(
                "this command needs `weierstrass` or `null-data` input".into(),
            )),
        }
    }

    /// Checks the flux table against `l` holes and dimension `n`.
    pub fn checked_flux(&self, l: usize, n: usize) -> Result<Option<Vec<Vec<f64>>>, CliError> {
        let Some(rows) = &self.flux else {
            return Ok(None);
        };
        if rows.len() != l {
            return Err(CliError::Config(format!(
                "flux has {} rows, domain has {l} holes",
                rows.len()
            )));
        }
        if let Some((j, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(CliError::Config(format!(
                "flux row {j} has {} entries, data has dimension {n}",
                r.len()
            )));
        }
        Ok(Some(rows.clone()))
    }
}

impl IntervalSpec {
    pub fn parsed_components(&self) -> Result<Vec<Expr>, CliError> {
        self.components.iter().map(|s| parse_s(s)).collect()
    }
}

pub fn parse_s(src: &str) -> Result<Expr, CliError> {
    Expr::parse(src, "s").map_err(|e| CliError::Config(format!("{src:?}: {e}")))
}
