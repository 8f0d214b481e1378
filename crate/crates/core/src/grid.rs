//! Structured cell-centred grids over material coordinates.
//!
//! Fields are stored row-major with `X` fastest: cell `(i, j)` lives at
//! `j * nx + i`. A 1D grid behaves as a 2D grid with a single row of unit
//! transverse extent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub nx: usize,
    pub dx: f64,
    pub origin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    D1(Grid1D),
    D2(Grid2D),
}

impl Grid1D {
    pub fn new(nx: usize, dx: f64, origin: f64) -> Result<Self> {
        let g = Self { nx, dx, origin };
        Grid::D1(g).validate()?;
        Ok(g)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.dx
    }
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, origin: [f64; 2]) -> Result<Self> {
        let g = Self {
            nx,
            ny,
            dx,
            dy,
            origin,
        };
        Grid::D2(g).validate()?;
        Ok(g)
    }
}

impl From<Grid1D> for Grid {
    fn from(g: Grid1D) -> Self {
        Grid::D1(g)
    }
}

impl From<Grid2D> for Grid {
    fn from(g: Grid2D) -> Self {
        Grid::D2(g)
    }
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let check_n = |name: &str, n: usize| {
            if n < 3 {
                Err(Error::InvalidValue(name.into(), "must be >= 3".into()))
            } else {
                Ok(())
            }
        };
        let check_h = |name: &str, h: f64| {
            if !(h > 0.0) || !h.is_finite() {
                Err(Error::InvalidValue(name.into(), "must be > 0".into()))
            } else {
                Ok(())
            }
        };
        match self {
            Grid::D1(g) => {
                check_n("nx", g.nx)?;
                check_h("dx", g.dx)
            }
            Grid::D2(g) => {
                check_n("nx", g.nx)?;
                check_n("ny", g.ny)?;
                check_h("dx", g.dx)?;
                check_h("dy", g.dy)
            }
        }
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, Grid::D2(_))
    }

    pub fn nx(&self) -> usize {
        match self {
            Grid::D1(g) => g.nx,
            Grid::D2(g) => g.nx,
        }
    }

    pub fn ny(&self) -> usize {
        match self {
            Grid::D1(_) => 1,
            Grid::D2(g) => g.ny,
        }
    }

    pub fn dx(&self) -> f64 {
        match self {
            Grid::D1(g) => g.dx,
            Grid::D2(g) => g.dx,
        }
    }

    /// Transverse spacing; unit width for 1D grids.
    pub fn dy(&self) -> f64 {
        match self {
            Grid::D1(_) => 1.0,
            Grid::D2(g) => g.dy,
        }
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    pub fn origin_x(&self) -> f64 {
        match self {
            Grid::D1(g) => g.origin,
            Grid::D2(g) => g.origin[0],
        }
    }

    pub fn origin_y(&self) -> f64 {
        match self {
            Grid::D1(_) => 0.0,
            Grid::D2(g) => g.origin[1],
        }
    }

    /// Cell-centre `X` coordinate of column `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.origin_x() + (i as f64 + 0.5) * self.dx()
    }

    /// Cell-centre `Y` coordinate of row `j` (zero for 1D grids).
    pub fn y(&self, j: usize) -> f64 {
        match self {
            Grid::D1(_) => 0.0,
            Grid::D2(g) => g.origin[1] + (j as f64 + 0.5) * g.dy,
        }
    }

    pub fn length_x(&self) -> f64 {
        self.nx() as f64 * self.dx()
    }

    pub fn length_y(&self) -> f64 {
        match self {
            Grid::D1(_) => 0.0,
            Grid::D2(g) => g.ny as f64 * g.dy,
        }
    }

    /// Index of the cell containing the material point `(x, y)`.
    pub fn locate(&self, x: f64, y: f64) -> Option<usize> {
        let fi = (x - self.origin_x()) / self.dx();
        if !(0.0..=self.nx() as f64).contains(&fi) {
            return None;
        }
        let i = (fi as usize).min(self.nx() - 1);
        let j = match self {
            Grid::D1(_) => 0,
            Grid::D2(g) => {
                let fj = (y - g.origin[1]) / g.dy;
                if !(0.0..=g.ny as f64).contains(&fj) {
                    return None;
                }
                (fj as usize).min(g.ny - 1)
            }
        };
        Some(self.idx(i, j))
    }

    /// Same grid with spacing divided by `factor` and cell counts multiplied.
    pub fn refined(&self, factor: usize) -> Grid {
        let f = factor as f64;
        match self {
            Grid::D1(g) => Grid::D1(Grid1D {
                nx: g.nx * factor,
                dx: g.dx / f,
                origin: g.origin,
            }),
            Grid::D2(g) => Grid::D2(Grid2D {
                nx: g.nx * factor,
                ny: g.ny * factor,
                dx: g.dx / f,
                dy: g.dy / f,
                origin: g.origin,
            }),
        }
    }
}
