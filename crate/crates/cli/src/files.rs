//! On-disk formats: JSON with complex entries as `[re, im]` pairs and
//! row-major matrices. Channels are stored as Kraus lists. Parse failures
//! carry the offending field path.

use serde::{Deserialize, Serialize};

use teledense::qcore::linalg::{c, CMat};
use teledense::{Channel, DensityOp, Povm, SystemDims, Tolerances};

use crate::error::{CliError, CliResult};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// A density operator: factor dimensions plus the full row-major matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: JsonMatrix,
}

/// A channel as a Kraus list of `out_dim x in_dim` matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<JsonMatrix>,
}

/// A full protocol: resource state, measurement on `(C', A)`, decoders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub dim_c: usize,
    pub resource: StateFile,
    pub povm: Vec<JsonMatrix>,
    pub decoders: Vec<ChannelFile>,
}

pub fn matrix_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(j: &JsonMatrix, rows: usize, cols: usize, path: &str) -> CliResult<CMat> {
    if j.len() != rows {
        return Err(CliError::Parse(format!(
            "{path}: has {} rows, expected {rows}",
            j.len()
        )));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in j.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::Parse(format!(
                "{path}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (jc, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(CliError::Parse(format!(
                    "{path}: entry ({i}, {jc}) is not finite"
                )));
            }
            m[(i, jc)] = c(re, im);
        }
    }
    Ok(m)
}

impl StateFile {
    pub fn from_density(rho: &DensityOp) -> Self {
        Self {
            dims: rho.dims().dims(),
            matrix: matrix_to_json(rho.matrix()),
        }
    }

    /// Validates into a density operator; bipartite inputs get the labels
    /// `A, B`, others `S0, S1, ...`.
    pub fn to_density(&self, tol: &Tolerances, path: &str) -> CliResult<DensityOp> {
        if self.dims.is_empty() {
            return Err(CliError::Parse(format!("{path}.dims: empty")));
        }
        let total: usize = self.dims.iter().product();
        let m = matrix_from_json(&self.matrix, total, total, &format!("{path}.matrix"))?;
        let labels: Vec<String> = match self.dims.len() {
            1 => vec!["A".into()],
            2 => vec!["A".into(), "B".into()],
            n => (0..n).map(|i| format!("S{i}")).collect(),
        };
        let dims = SystemDims::new(labels.into_iter().zip(self.dims.iter().copied()))
            .map_err(|e| CliError::Parse(format!("{path}.dims: {e}")))?;
        DensityOp::new_with_tol(dims, m, tol)
            .map_err(|e| CliError::Parse(format!("{path}.matrix: {e}")))
    }
}

impl ChannelFile {
    pub fn from_channel(ch: &Channel) -> Self {
        let kraus = match ch.kraus() {
            Some(ks) => ks.iter().map(matrix_to_json).collect(),
            None => {
                let ks = teledense::kraus_from_choi(
                    &ch.choi_matrix(),
                    ch.in_total(),
                    ch.out_total(),
                    &Tolerances::default(),
                )
                .expect("valid channel has a Kraus form");
                ks.iter().map(matrix_to_json).collect()
            }
        };
        Self {
            in_dim: ch.in_total(),
            out_dim: ch.out_total(),
            kraus,
        }
    }

    pub fn to_channel(&self, tol: &Tolerances, path: &str) -> CliResult<Channel> {
        if self.kraus.is_empty() {
            return Err(CliError::Parse(format!("{path}.kraus: empty")));
        }
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(i, k)| {
                matrix_from_json(k, self.out_dim, self.in_dim, &format!("{path}.kraus[{i}]"))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Channel::from_kraus_with_tol(
            SystemDims::single("B", self.in_dim)
                .map_err(|e| CliError::Parse(format!("{path}.in_dim: {e}")))?,
            SystemDims::single("C", self.out_dim)
                .map_err(|e| CliError::Parse(format!("{path}.out_dim: {e}")))?,
            kraus,
            tol,
        )
        .map_err(|e| CliError::Parse(format!("{path}.kraus: {e}")))
    }
}

impl ProtocolFile {
    pub fn from_protocol(p: &teledense::teleport::TeleportProtocol) -> Self {
        Self {
            dim_c: p.dim_c(),
            resource: StateFile::from_density(p.resource()),
            povm: p.povm().effects().iter().map(matrix_to_json).collect(),
            decoders: p.decoders().iter().map(ChannelFile::from_channel).collect(),
        }
    }

    pub fn to_protocol(
        &self,
        tol: &Tolerances,
    ) -> CliResult<teledense::teleport::TeleportProtocol> {
        let rho = self.resource.to_density(tol, "resource")?;
        if rho.dims().len() != 2 {
            return Err(CliError::Parse(
                "resource.dims: protocol resource must be bipartite".into(),
            ));
        }
        let dim_a = rho.dims().factor(0).1;
        let d = self.dim_c * dim_a;
        let effects = self
            .povm
            .iter()
            .enumerate()
            .map(|(i, e)| matrix_from_json(e, d, d, &format!("povm[{i}]")))
            .collect::<CliResult<Vec<_>>>()?;
        let povm_dims = SystemDims::new([("C'", self.dim_c), ("A", dim_a)])
            .map_err(|e| CliError::Parse(format!("dim_c: {e}")))?;
        let povm = Povm::new_with_tol(povm_dims, effects, tol)
            .map_err(|e| CliError::Parse(format!("povm: {e}")))?;
        let decoders = self
            .decoders
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_channel(tol, &format!("decoders[{i}]")))
            .collect::<CliResult<Vec<_>>>()?;
        teledense::teleport::TeleportProtocol::new(rho, povm, decoders, self.dim_c)
            .map_err(|e| CliError::Parse(format!("protocol: {e}")))
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Parse(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Parse(format!("serialization: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
