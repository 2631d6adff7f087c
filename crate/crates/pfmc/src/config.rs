//! JSON experiment schemas and their conversion into core types.
//!
//! Schema errors surface as validation errors naming the offending field;
//! every run records the resolved configuration in its metadata sidecar,
//! including defaults that were filled in (link lists, hopping phases).

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use pfmc_core::apsg::{ApsgBlock, ApsgState};
use pfmc_core::error::Error as CoreError;
use pfmc_core::hubbard::QuenchConfig;
use pfmc_core::lattice::{LatticeSpec, Link};

pub type Result<T> = std::result::Result<T, CoreError>;

fn invalid(msg: impl Into<String>) -> CoreError {
    CoreError::Validation(msg.into())
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ExperimentConfig {
    pub kind: String,
    pub budget: Budget,
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    pub inputs: serde_json::Value,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config schema: {e}")))
    }

    pub fn parse_inputs<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.inputs.clone())
            .map_err(|e| invalid(format!("inputs for kind {:?}: {e}", self.kind)))
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
pub struct Budget {
    pub eps: f64,
    pub delta: f64,
}

/// Flags recording schema defaults that were filled in during resolution.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ResolutionFlags {
    pub phases_defaulted: bool,
    pub links_defaulted: bool,
    pub doublon_representation: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct LinkJson {
    pub i: usize,
    pub j: usize,
    #[serde(default)]
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct LatticeJson {
    pub lx: usize,
    pub ly: usize,
    #[serde(default)]
    pub links: Option<Vec<LinkJson>>,
    #[serde(rename = "J", default)]
    pub j: Option<f64>,
}

impl LatticeJson {
    pub fn resolve(&self, flags: &mut ResolutionFlags) -> Result<LatticeSpec> {
        match &self.links {
            None => {
                flags.links_defaulted = true;
                flags.phases_defaulted = true;
                LatticeSpec::grid(self.lx, self.ly)
            }
            Some(links) => {
                let links = links
                    .iter()
                    .map(|l| {
                        if l.phi.is_none() {
                            flags.phases_defaulted = true;
                        }
                        Link {
                            i: l.i,
                            j: l.j,
                            phi: l.phi.unwrap_or(0.0),
                        }
                    })
                    .collect();
                LatticeSpec::new(self.lx, self.ly, links)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct QuenchJson {
    pub lattice: LatticeJson,
    pub dimers: Vec<[usize; 2]>,
    #[serde(default)]
    pub holons: Vec<usize>,
    #[serde(default)]
    pub doublons: Vec<usize>,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "W", default)]
    pub w: f64,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_trotter_k")]
    pub trotter_k: u32,
    /// How doubly occupied sites enter the paired state; both choices
    /// produce the same single-slot block here and the flag is recorded
    /// in the output metadata.
    #[serde(default)]
    pub doublon_representation: Option<String>,
}

fn default_trotter_k() -> u32 {
    1
}

impl QuenchJson {
    pub fn resolve(&self, flags: &mut ResolutionFlags) -> Result<QuenchConfig> {
        let lattice = self.lattice.resolve(flags)?;
        flags.doublon_representation = Some(
            self.doublon_representation
                .clone()
                .unwrap_or_else(|| "single_slot_block".into()),
        );
        if let Some(repr) = &self.doublon_representation {
            if repr != "single_slot_block" && repr != "product_factor" {
                return Err(invalid(format!(
                    "doublon_representation must be single_slot_block or product_factor, got {repr:?}"
                )));
            }
        }
        let cfg = QuenchConfig {
            lattice,
            dimers: self.dimers.iter().map(|d| (d[0], d[1])).collect(),
            holons: self.holons.clone(),
            doublons: self.doublons.clone(),
            j: self.j,
            w: self.w,
            times: self.times.clone(),
            trotter_k: self.trotter_k,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// APSG state wire format: {num_modes, blocks: [{modes, weights: [[re,im]]}]}.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ApsgJson {
    pub num_modes: usize,
    pub blocks: Vec<BlockJson>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct BlockJson {
    pub modes: Vec<usize>,
    pub weights: Vec<[f64; 2]>,
}

impl ApsgJson {
    pub fn resolve(&self) -> Result<ApsgState> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let weights = b
                    .weights
                    .iter()
                    .map(|w| Complex64::new(w[0], w[1]))
                    .collect();
                ApsgBlock::new(b.modes.clone(), weights)
            })
            .collect::<Result<Vec<_>>>()?;
        ApsgState::new(self.num_modes, blocks)
    }

    pub fn from_state(state: &ApsgState) -> Self {
        ApsgJson {
            num_modes: state.num_modes(),
            blocks: state
                .blocks()
                .iter()
                .map(|b| BlockJson {
                    modes: b.modes().to_vec(),
                    weights: b.weights().iter().map(|w| [w.re, w.im]).collect(),
                })
                .collect(),
        }
    }
}

/// A paired-state source: an inline APSG object, the Ψ₄ product family, or
/// a quench initial state.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum StateSpec {
    Psi4 { psi4_blocks: usize },
    FromQuench { quench_state: QuenchJson },
    Inline(ApsgJson),
}

impl StateSpec {
    pub fn resolve(&self, flags: &mut ResolutionFlags) -> Result<ApsgState> {
        match self {
            StateSpec::Psi4 { psi4_blocks } => pfmc_core::apsg::psi4_product(*psi4_blocks),
            StateSpec::FromQuench { quench_state } => {
                let cfg = quench_state.resolve(flags)?;
                pfmc_core::hubbard::build_initial_state(&cfg)
            }
            StateSpec::Inline(json) => json.resolve(),
        }
    }
}

/// Bra side of an overlap: either a Fock occupation string or a paired state.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum BraSpec {
    Fock { fock: String },
    State(StateSpec),
}

/// A number-preserving map, possibly composed from parts.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSpec {
    Identity(usize),
    Hopping {
        lattice: LatticeJson,
        t: f64,
        #[serde(rename = "J", default)]
        j: Option<f64>,
    },
    DiagonalPhases(Vec<f64>),
    Matrix {
        entries: Vec<Vec<[f64; 2]>>,
        #[serde(default)]
        unitary: bool,
    },
    Compose(Vec<MapSpec>),
    Adjoint(Box<MapSpec>),
    HsPropagator {
        lattice: LatticeJson,
        #[serde(rename = "J")]
        j: f64,
        #[serde(rename = "W")]
        w: f64,
        dt: f64,
        sigma: Vec<Vec<i8>>,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl MatrixJson {
    pub fn resolve(&self) -> Result<pfmc_core::CMatrix> {
        let n = self.0.len();
        for (r, row) in self.0.iter().enumerate() {
            if row.len() != n {
                return Err(invalid(format!(
                    "matrix row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        Ok(pfmc_core::CMatrix::from_fn(n, n, |r, c| {
            Complex64::new(self.0[r][c][0], self.0[r][c][1])
        }))
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct HamiltonianJson {
    #[serde(default)]
    pub e0: f64,
    #[serde(default)]
    pub h1: Option<MatrixJson>,
    #[serde(default)]
    pub factors: Vec<FactorJson>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct FactorJson {
    pub lambda: f64,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitElementJson {
    Gaussian(MapSpec),
    Phase { i: usize, j: usize, theta: f64 },
}

// ---- kind-specific input schemas ----

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct OverlapInputs {
    pub map: MapSpec,
    pub ket: StateSpec,
    pub bra: BraSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct CorrelatorInputs {
    pub map_left: MapSpec,
    pub map_right: MapSpec,
    pub bra: StateSpec,
    pub ket: StateSpec,
    pub modes: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct MarginalInputs {
    pub map: MapSpec,
    pub state: StateSpec,
    pub modes: Vec<usize>,
    pub pattern: Vec<u8>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct BinnedInputs {
    pub map: MapSpec,
    pub state: StateSpec,
    pub omega: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RdmInputs {
    pub map_left: MapSpec,
    pub map_right: MapSpec,
    pub bra: StateSpec,
    pub ket: StateSpec,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct HamiltonianInputs {
    pub map_left: MapSpec,
    pub map_right: MapSpec,
    pub bra: StateSpec,
    pub ket: StateSpec,
    pub hamiltonian: HamiltonianJson,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct WilsonInputs {
    pub quench: QuenchJson,
    pub time: f64,
    pub contour: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct QuenchSuiteInputs {
    pub quench: QuenchJson,
    pub czz_pair: [usize; 2],
    #[serde(default)]
    pub wilson_contour: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct HsParityInputs {
    pub quench: QuenchJson,
    pub dt: f64,
    pub n_slices: usize,
    pub subset: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ExtentInputs {
    pub bra: StateSpec,
    pub ket: StateSpec,
    pub circuit: Vec<CircuitElementJson>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct EnvelopeInputs {
    pub w_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub trotter_k: u32,
    pub l: usize,
    pub r: usize,
    #[serde(default = "default_ct")]
    pub c_t: f64,
}

fn default_ct() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct NociInputs {
    pub state: StateSpec,
    pub map_left: MapSpec,
    pub map_right: MapSpec,
    pub hamiltonian: HamiltonianJson,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct AfqmcInputs {
    pub trial: StateSpec,
    pub walker_init: StateSpec,
    pub lattice: LatticeJson,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub dt: f64,
    pub sigma: Vec<Vec<i8>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct OrbitalGradientInputs {
    pub state: StateSpec,
    pub map: MapSpec,
    pub hamiltonian: HamiltonianJson,
    pub pairs: Vec<[usize; 2]>,
}

/// Plot reshaping request.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct PlotSpec {
    /// Parameter key providing the x axis, or "observable".
    pub x: String,
    /// Key grouping rows into series (default "observable").
    #[serde(default = "default_series")]
    pub series: String,
    /// Keep only rows whose parameter/observable match these values.
    #[serde(default)]
    pub filter: std::collections::BTreeMap<String, String>,
}

fn default_series() -> String {
    "observable".into()
}
