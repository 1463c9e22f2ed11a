//! Symmetric second-order tensors, isotropic fourth-order tensors, and full
//! fourth-order tensors in an orthonormal (Mandel) component basis.
//!
//! All objects carry their spatial dimension `d` (2 or 3) as a runtime value;
//! there is a single code path for both. Symmetric second-order tensors are
//! stored as vectors of `m = d(d+1)/2` components with the off-diagonal
//! entries scaled by sqrt(2):
//!
//! ```text
//! d = 2:  (T11, T22, sqrt(2) T12)
//! d = 3:  (T11, T22, T33, sqrt(2) T23, sqrt(2) T13, sqrt(2) T12)
//! ```
//!
//! With this scaling the double contraction of two symmetric tensors is the
//! plain dot product of their component vectors, and a fourth-order tensor
//! with minor and major symmetries acts as a symmetric m x m matrix. No
//! engineering shear factors appear anywhere.
//!
//! The isotropic projectors are central to everything downstream:
//! `J = (1/d) I (x) I` extracts the spherical part, `K = I4 - J` the
//! deviatoric part. They satisfy `J:J = J`, `K:K = K`, `J:K = 0` and span
//! subspaces of dimension `n_J = 1` and `n_K = d(d+1)/2 - 1`.

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Spatial dimension, restricted to 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    /// Validates a runtime dimension value.
    pub fn from_usize(d: usize) -> Result<Dim> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::UnsupportedDimension(d)),
        }
    }

    /// Number of spatial dimensions `d`.
    pub const fn size(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Length `m = d(d+1)/2` of the Mandel component vector.
    pub const fn mandel_len(self) -> usize {
        match self {
            Dim::Two => 3,
            Dim::Three => 6,
        }
    }

    /// Index pairs (i, j) of the Mandel slots, diagonal first.
    pub const fn mandel_pairs(self) -> &'static [(usize, usize)] {
        match self {
            Dim::Two => &[(0, 0), (1, 1), (0, 1)],
            Dim::Three => &[(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)],
        }
    }

    const fn as_f64(self) -> f64 {
        self.size() as f64
    }
}

/// Dimensions of the identity and of the isotropic projector images.
///
/// `n_i` is the dimension of the space of symmetric second-order tensors,
/// `n_j = 1` that of the spherical subspace, and `n_k = n_i - 1` that of the
/// deviatoric subspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectorDims {
    pub n_i: usize,
    pub n_j: usize,
    pub n_k: usize,
}

/// Returns `(n_I, n_J, n_K)` for dimension `d`.
pub fn projector_dims(dim: Dim) -> ProjectorDims {
    let n_i = dim.mandel_len();
    ProjectorDims {
        n_i,
        n_j: 1,
        n_k: n_i - 1,
    }
}

/// Hydrostatic and equivalent invariants of a strain-like tensor.
///
/// `hydrostatic` is `tr(e) / d`; `equivalent` is
/// `sqrt((d - 1) / d * dev(e) : dev(e))`, the von Mises style scalar measure
/// of the deviatoric part. Together with the norm they satisfy
/// `|e|^2 = d * hydrostatic^2 + d / (d - 1) * equivalent^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrainInvariants {
    pub hydrostatic: f64,
    pub equivalent: f64,
}

/// Components of a tensor along and orthogonal to a reference direction.
///
/// `parallel` is the signed coefficient `e : r / |r|`; `orthogonal` is the
/// norm of what remains, so `|e|^2 = parallel^2 + orthogonal^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParallelSplit {
    pub parallel: f64,
    pub orthogonal: f64,
}

/// Symmetric second-order tensor in Mandel components.
///
/// Construction is explicit (zero, identity, components); all arithmetic
/// returns new values, nothing mutates in place. The backing array always has
/// room for the 3D case; only the first `mandel_len()` entries are meaningful.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymTensor2 {
    dim: Dim,
    c: [f64; 6],
}

impl SymTensor2 {
    /// Zero tensor.
    pub fn zero(dim: Dim) -> Self {
        SymTensor2 { dim, c: [0.0; 6] }
    }

    /// Second-order identity `I`.
    pub fn identity(dim: Dim) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim.size() {
            t.c[i] = 1.0;
        }
        t
    }

    /// Builds a tensor from its Mandel component vector.
    ///
    /// # Panics
    ///
    /// Panics if `comps.len() != dim.mandel_len()`.
    pub fn from_mandel(dim: Dim, comps: &[f64]) -> Self {
        assert_eq!(
            comps.len(),
            dim.mandel_len(),
            "wrong Mandel component count"
        );
        let mut t = Self::zero(dim);
        t.c[..comps.len()].copy_from_slice(comps);
        t
    }

    /// Builds a tensor from index components, reading only `(i, j)` with
    /// `i <= j`.
    ///
    /// # Panics
    ///
    /// Panics if `mat` is not symmetric to within exact equality of the
    /// entries actually read (it never reads below the diagonal).
    pub fn from_matrix(dim: Dim, mat: &[[f64; 3]; 3]) -> Self {
        let mut t = Self::zero(dim);
        for (slot, &(i, j)) in dim.mandel_pairs().iter().enumerate() {
            t.c[slot] = if i == j {
                mat[i][j]
            } else {
                SQRT_2 * mat[i][j]
            };
        }
        t
    }

    /// Spatial dimension.
    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Mandel component vector of length `d(d+1)/2`.
    pub fn mandel(&self) -> &[f64] {
        &self.c[..self.dim.mandel_len()]
    }

    /// Index component `T_ij` (unscaled, so `get(0, 1)` is the physical
    /// off-diagonal entry).
    ///
    /// # Panics
    ///
    /// Panics if an index is out of range for the dimension.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let d = self.dim.size();
        assert!(i < d && j < d, "index out of range");
        if i == j {
            return self.c[i];
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let slot = self
            .dim
            .mandel_pairs()
            .iter()
            .position(|&p| p == (lo, hi))
            .expect("off-diagonal slot");
        self.c[slot] / SQRT_2
    }

    /// Sets the symmetric pair `T_ij = T_ji = value`.
    ///
    /// # Panics
    ///
    /// Panics if an index is out of range for the dimension.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let d = self.dim.size();
        assert!(i < d && j < d, "index out of range");
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let slot = self
            .dim
            .mandel_pairs()
            .iter()
            .position(|&p| p == (lo, hi))
            .expect("slot");
        self.c[slot] = if i == j { value } else { SQRT_2 * value };
    }

    /// Trace `T_ii`.
    pub fn trace(&self) -> f64 {
        self.c[..self.dim.size()].iter().sum()
    }

    /// Double contraction `self : other`, the dot product of Mandel vectors.
    ///
    /// # Panics
    ///
    /// Panics if dimensions differ.
    pub fn ddot(&self, other: &SymTensor2) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.mandel()
            .iter()
            .zip(other.mandel())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Frobenius norm `sqrt(T : T)`.
    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    /// Splits into spherical and deviatoric parts; the parts sum back to
    /// `self` and are orthogonal under the double contraction.
    pub fn sph_dev(&self) -> (SymTensor2, SymTensor2) {
        let mean = self.trace() / self.dim.as_f64();
        let mut sph = Self::zero(self.dim);
        for i in 0..self.dim.size() {
            sph.c[i] = mean;
        }
        let mut dev = *self;
        for i in 0..self.dim.size() {
            dev.c[i] -= mean;
        }
        (sph, dev)
    }

    /// Hydrostatic and equivalent strain invariants.
    pub fn invariants(&self) -> StrainInvariants {
        let d = self.dim.as_f64();
        let (_, dev) = self.sph_dev();
        StrainInvariants {
            hydrostatic: self.trace() / d,
            equivalent: ((d - 1.0) / d * dev.ddot(&dev)).sqrt(),
        }
    }

    /// Decomposes `self` into the component along `reference` and the norm of
    /// the orthogonal remainder.
    ///
    /// Errors with [`Error::ZeroMacroStrain`] when `reference` has zero norm,
    /// and with [`Error::DimensionMismatch`] when dimensions differ.
    pub fn parallel_split(&self, reference: &SymTensor2) -> Result<ParallelSplit> {
        if self.dim != reference.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.size(),
                got: reference.dim.size(),
            });
        }
        let rn = reference.norm();
        if rn == 0.0 {
            return Err(Error::ZeroMacroStrain);
        }
        let parallel = self.ddot(reference) / rn;
        let orth_sq = (self.ddot(self) - parallel * parallel).max(0.0);
        Ok(ParallelSplit {
            parallel,
            orthogonal: orth_sq.sqrt(),
        })
    }

    /// Dyadic product `self (x) other` as a full fourth-order tensor.
    ///
    /// # Panics
    ///
    /// Panics if dimensions differ.
    pub fn dyad(&self, other: &SymTensor2) -> FullTensor4 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let m = self.dim.mandel_len();
        let mut out = FullTensor4::zero(self.dim);
        for i in 0..m {
            for j in 0..m {
                out.m[i * 6 + j] = self.c[i] * other.c[j];
            }
        }
        out
    }
}

impl std::ops::Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, rhs: SymTensor2) -> SymTensor2 {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self;
        for i in 0..self.dim.mandel_len() {
            out.c[i] += rhs.c[i];
        }
        out
    }
}

impl std::ops::Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, rhs: SymTensor2) -> SymTensor2 {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self;
        for i in 0..self.dim.mandel_len() {
            out.c[i] -= rhs.c[i];
        }
        out
    }
}

impl std::ops::Mul<f64> for SymTensor2 {
    type Output = SymTensor2;
    fn mul(self, s: f64) -> SymTensor2 {
        let mut out = self;
        for i in 0..self.dim.mandel_len() {
            out.c[i] *= s;
        }
        out
    }
}

impl std::ops::Neg for SymTensor2 {
    type Output = SymTensor2;
    fn neg(self) -> SymTensor2 {
        self * -1.0
    }
}

/// Isotropic fourth-order tensor `a J + b K`.
///
/// The pair `(a, b)` acts by scaling the spherical part by `a` and the
/// deviatoric part by `b`. An isotropic stiffness is the special case
/// `a = d kappa`, `b = 2 mu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoTensor4 {
    dim: Dim,
    /// Coefficient on the spherical projector `J`.
    pub a: f64,
    /// Coefficient on the deviatoric projector `K`.
    pub b: f64,
}

impl IsoTensor4 {
    pub fn new(dim: Dim, a: f64, b: f64) -> Self {
        IsoTensor4 { dim, a, b }
    }

    /// Isotropic stiffness `d kappa J + 2 mu K` for bulk modulus `kappa` and
    /// shear modulus `mu`.
    pub fn stiffness(dim: Dim, kappa: f64, mu: f64) -> Self {
        IsoTensor4 {
            dim,
            a: dim.as_f64() * kappa,
            b: 2.0 * mu,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Reads `(kappa, mu) = (a / d, b / 2)` back from a stiffness-like tensor.
    pub fn as_moduli(&self) -> (f64, f64) {
        (self.a / self.dim.as_f64(), self.b / 2.0)
    }

    /// Applies the tensor: `a * sph(t) + b * dev(t)`.
    ///
    /// Errors with [`Error::DimensionMismatch`] when dimensions differ.
    pub fn apply(&self, t: &SymTensor2) -> Result<SymTensor2> {
        if self.dim != t.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.size(),
                got: t.dim.size(),
            });
        }
        let (sph, dev) = t.sph_dev();
        Ok(sph * self.a + dev * self.b)
    }

    /// Composition `self : other`, which multiplies coefficients slotwise.
    ///
    /// # Panics
    ///
    /// Panics if dimensions differ.
    pub fn compose(&self, other: &IsoTensor4) -> IsoTensor4 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        IsoTensor4 {
            dim: self.dim,
            a: self.a * other.a,
            b: self.b * other.b,
        }
    }

    /// Expands to a dense Mandel matrix.
    pub fn to_full(&self) -> FullTensor4 {
        let j = FullTensor4::proj_spherical(self.dim);
        let k = FullTensor4::proj_deviatoric(self.dim);
        j * self.a + k * self.b
    }
}

/// Fourth-order tensor with minor and major symmetries, stored as its
/// symmetric Mandel matrix (m x m, m = d(d+1)/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullTensor4 {
    dim: Dim,
    /// Row-major 6 x 6 backing; only the leading m x m block is meaningful.
    m: [f64; 36],
}

impl FullTensor4 {
    pub fn zero(dim: Dim) -> Self {
        FullTensor4 { dim, m: [0.0; 36] }
    }

    /// Symmetric fourth-order identity `I4` (identity Mandel matrix).
    pub fn identity(dim: Dim) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim.mandel_len() {
            t.m[i * 6 + i] = 1.0;
        }
        t
    }

    /// Spherical projector `J = (1/d) I (x) I`.
    pub fn proj_spherical(dim: Dim) -> Self {
        let i2 = SymTensor2::identity(dim);
        i2.dyad(&i2) * (1.0 / dim.as_f64())
    }

    /// Deviatoric projector `K = I4 - J`.
    pub fn proj_deviatoric(dim: Dim) -> Self {
        Self::identity(dim) - Self::proj_spherical(dim)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Mandel matrix entry `(i, j)`.
    ///
    /// # Panics
    ///
    /// Panics if an index is out of range.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let m = self.dim.mandel_len();
        assert!(i < m && j < m, "index out of range");
        self.m[i * 6 + j]
    }

    /// Sets Mandel matrix entry `(i, j)`.
    ///
    /// # Panics
    ///
    /// Panics if an index is out of range.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let m = self.dim.mandel_len();
        assert!(i < m && j < m, "index out of range");
        self.m[i * 6 + j] = value;
    }

    /// Applies the tensor to a symmetric second-order tensor (matrix-vector
    /// product in Mandel components).
    ///
    /// Errors with [`Error::DimensionMismatch`] when dimensions differ.
    pub fn apply(&self, t: &SymTensor2) -> Result<SymTensor2> {
        if self.dim != t.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim.size(),
                got: t.dim.size(),
            });
        }
        let m = self.dim.mandel_len();
        let mut out = SymTensor2::zero(self.dim);
        for i in 0..m {
            let mut acc = 0.0;
            for j in 0..m {
                acc += self.m[i * 6 + j] * t.c[j];
            }
            out.c[i] = acc;
        }
        Ok(out)
    }

    /// Full double contraction `self :: other = A_ijkl B_ijkl`, the Frobenius
    /// product of Mandel matrices.
    ///
    /// # Panics
    ///
    /// Panics if dimensions differ.
    pub fn ddot4(&self, other: &FullTensor4) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let m = self.dim.mandel_len();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += self.m[i * 6 + j] * other.m[i * 6 + j];
            }
        }
        acc
    }

    /// Composition `self : other` (Mandel matrix product).
    ///
    /// # Panics
    ///
    /// Panics if dimensions differ.
    pub fn compose(&self, other: &FullTensor4) -> FullTensor4 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let m = self.dim.mandel_len();
        let mut out = FullTensor4::zero(self.dim);
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0.0;
                for k in 0..m {
                    acc += self.m[i * 6 + k] * other.m[k * 6 + j];
                }
                out.m[i * 6 + j] = acc;
            }
        }
        out
    }

    /// Frobenius norm of the Mandel matrix.
    pub fn norm(&self) -> f64 {
        self.ddot4(self).sqrt()
    }

    /// Largest deviation from major symmetry, `max |A_ij - A_ji|`.
    pub fn major_sym_error(&self) -> f64 {
        let m = self.dim.mandel_len();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in (i + 1)..m {
                worst = worst.max((self.m[i * 6 + j] - self.m[j * 6 + i]).abs());
            }
        }
        worst
    }

    /// Splits into the isotropic part `a J + b K` and the orthogonal
    /// remainder.
    ///
    /// The coefficients are the normalized projections
    /// `a = (A :: J) / n_J` and `b = (A :: K) / n_K`; the remainder is
    /// orthogonal to both projectors under the full double contraction.
    pub fn iso_project(&self) -> (IsoTensor4, FullTensor4) {
        let dims = projector_dims(self.dim);
        let j = Self::proj_spherical(self.dim);
        let k = Self::proj_deviatoric(self.dim);
        let a = self.ddot4(&j) / dims.n_j as f64;
        let b = self.ddot4(&k) / dims.n_k as f64;
        let iso = IsoTensor4::new(self.dim, a, b);
        let rest = *self - iso.to_full();
        (iso, rest)
    }
}

impl std::ops::Add for FullTensor4 {
    type Output = FullTensor4;
    fn add(self, rhs: FullTensor4) -> FullTensor4 {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self;
        for i in 0..36 {
            out.m[i] += rhs.m[i];
        }
        out
    }
}

impl std::ops::Sub for FullTensor4 {
    type Output = FullTensor4;
    fn sub(self, rhs: FullTensor4) -> FullTensor4 {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self;
        for i in 0..36 {
            out.m[i] -= rhs.m[i];
        }
        out
    }
}

impl std::ops::Mul<f64> for FullTensor4 {
    type Output = FullTensor4;
    fn mul(self, s: f64) -> FullTensor4 {
        let mut out = self;
        for i in 0..36 {
            out.m[i] *= s;
        }
        out
    }
}
