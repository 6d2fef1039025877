//! The operator `L_{P,U}` bundled with its integration mesh.

use crate::bcond::{BcClass, BoundaryMatrix, MinorSet, ModelSpectrum};
use crate::error::{DiracError, Result};
use crate::matrix2::c64;
use crate::potential::{Mesh, PotentialSpec, DEFAULT_MESH_CELLS, DEFAULT_MESH_TOL};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Unperturbed eigenvalue lattice the spectrum is paired with.
///
/// With a diagonal part in `P`, this is the lattice of the gauge-reduced
/// boundary matrix shifted by `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub model: ModelSpectrum,
    pub shift: Complex64,
    pub reduced_bc: BoundaryMatrix,
}

impl Lattice {
    pub fn lambda0(&self, n: i64) -> Complex64 {
        self.model.lambda0(n) + self.shift
    }

    pub fn doubled(&self) -> bool {
        self.model.doubled
    }
}

#[derive(Debug, Clone)]
pub struct DiracOperator {
    pub bc: BoundaryMatrix,
    pub potential: PotentialSpec,
    pub mesh: Mesh,
    pub minors: MinorSet,
    pub class: BcClass,
    pub lattice: Lattice,
}

impl DiracOperator {
    pub fn new(bc: BoundaryMatrix, potential: PotentialSpec) -> Result<Self> {
        Self::with_mesh_cells(bc, potential, DEFAULT_MESH_CELLS)
    }

    pub fn with_mesh_cells(bc: BoundaryMatrix, potential: PotentialSpec, cells: usize) -> Result<Self> {
        potential.validate()?;
        let mesh = Mesh::build(&potential, cells, DEFAULT_MESH_TOL);
        Self::with_mesh(bc, potential, mesh)
    }

    pub fn with_mesh(bc: BoundaryMatrix, potential: PotentialSpec, mesh: Mesh) -> Result<Self> {
        let minors = bc.minors()?;
        let class = minors.classify();
        if !class.is_regular() {
            return Err(DiracError::NonRegularInput);
        }
        let lattice = lattice_of(&bc, &potential)?;
        Ok(DiracOperator { bc, potential, mesh, minors, class, lattice })
    }

    /// The adjoint operator `L_{P*, U*}` on the same mesh.
    pub fn adjoint(&self) -> Result<Self> {
        Self::with_mesh(self.bc.adjoint()?, self.potential.adjoint(), self.mesh.adjoint())
    }

    pub fn lambda0(&self, n: i64) -> Complex64 {
        self.lattice.lambda0(n)
    }
}

fn lattice_of(bc: &BoundaryMatrix, p: &PotentialSpec) -> Result<Lattice> {
    if !p.has_diagonal() {
        return Ok(Lattice { model: bc.unperturbed_spectrum()?, shift: c64(0.0, 0.0), reduced_bc: *bc });
    }
    let i1 = p.p1.antiderivative(PI);
    let i4 = p.p4.antiderivative(PI);
    let shift = (i1 + i4) / (2.0 * PI);
    let reduced_bc = bc.scale_d((Complex64::i() * 0.5 * (i4 - i1)).exp())?;
    Ok(Lattice { model: reduced_bc.unperturbed_spectrum()?, shift, reduced_bc })
}
