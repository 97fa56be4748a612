use serde::{Deserialize, Serialize};

use crate::sfc::{LeafStatus, Refinement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Density {
    Dense,
    Sparse,
}

/// Density knowledge of a cell. Once decided it never changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum CellStatus {
    #[default]
    Unknown,
    Dense,
    Sparse,
}

impl From<Density> for CellStatus {
    fn from(d: Density) -> Self {
        match d {
            Density::Dense => CellStatus::Dense,
            Density::Sparse => CellStatus::Sparse,
        }
    }
}

impl From<CellStatus> for LeafStatus {
    fn from(s: CellStatus) -> Self {
        match s {
            CellStatus::Unknown => LeafStatus::Unknown,
            CellStatus::Dense => LeafStatus::Dense,
            CellStatus::Sparse => LeafStatus::Sparse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Occupancy {
    #[default]
    Unknown,
    Empty,
    Occupied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellKnowledge {
    pub status: CellStatus,
    pub occupancy: Occupancy,
}

/// A fact learned about one cell from a query answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mark {
    pub cell: usize,
    pub density: Option<Density>,
    pub occupancy: Option<Occupancy>,
}

impl Mark {
    pub fn empty(cell: usize) -> Self {
        Self {
            cell,
            density: Some(Density::Sparse),
            occupancy: Some(Occupancy::Empty),
        }
    }
}

/// Per-cell knowledge over the 1D domain.
#[derive(Debug, Clone, Default)]
pub struct CellStore {
    cells: Vec<CellKnowledge>,
}

impl CellStore {
    pub fn new(len: usize) -> Self {
        Self {
            cells: vec![CellKnowledge::default(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, cell: usize) -> CellKnowledge {
        self.cells[cell]
    }

    pub fn status(&self, cell: usize) -> CellStatus {
        self.cells[cell].status
    }

    pub fn is_empty_cell(&self, cell: usize) -> bool {
        self.cells[cell].occupancy == Occupancy::Empty
    }

    pub fn statuses(&self) -> impl Iterator<Item = CellStatus> + '_ {
        self.cells.iter().map(|c| c.status)
    }

    pub fn set_density(&mut self, cell: usize, d: Density) {
        let k = &mut self.cells[cell];
        if k.status == CellStatus::Unknown {
            k.status = d.into();
        }
    }

    pub fn apply(&mut self, m: &Mark) {
        if let Some(d) = m.density {
            self.set_density(m.cell, d);
        }
        if let Some(o) = m.occupancy {
            let k = &mut self.cells[m.cell];
            if k.occupancy == Occupancy::Unknown {
                k.occupancy = o;
            }
        }
    }

    /// Replace `r.cell` by `r.fanout` undecided cells.
    pub fn split(&mut self, r: &Refinement) {
        let fresh = std::iter::repeat_n(CellKnowledge::default(), r.fanout);
        self.cells.splice(r.cell..=r.cell, fresh);
    }
}
