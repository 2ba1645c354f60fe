//! Grids, assembled operators and lattice forms.

mod assemble;
mod cutoff;
mod forms;
mod grid;

pub use assemble::{
    assemble, assemble_time, assemble_time_full, AssemblyOptions, DiscreteForm, FormMeta,
    SelfCellTreatment, Stencil, TimeAssembler,
};
pub use cutoff::CutoffProfile;
pub use forms::{
    anti_energy, carre_du_champ, form_value, half_set_identity, layer_cake_cutoff,
    layer_cake_weighted_form, sym_energy, HalfSetIdentity, LayerCake, PairSet, Part,
};
pub use grid::{Domain, Grid, MAX_NODES};

use thiserror::Error;

use crate::geometry::Point;
use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizeError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("{nodes} nodes exceed the dense cap of {cap}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("kernel evaluation failed at x = {x:?}, y = {y:?}")]
    Kernel { x: Point, y: Point },
    #[error("tail quadrature failed at node {node:?}: {source}")]
    Quadrature { node: Point, source: QuadratureError },
    #[error("{0}")]
    Mismatch(String),
    #[error("invalid input: {0}")]
    Input(String),
}
