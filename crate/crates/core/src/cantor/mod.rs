//! The embedding of the colored tree into nested squares, survival pruning, and the
//! verifiers for the line-constancy and strip-counting statements.
//!
//! Children of a square of side `s` form an `m[R/m] × m[R/m]` grid of side `s/R`
//! anchored at its lower-left corner. Child index `j = b·m² + row·m + col` sits in
//! block `b = block_row·[R/m] + block_col` (cell `(col, row)` within the block), and
//! its color is `b + 1`, so each color class is one `m × m` block.

mod lemmas;

pub use lemmas::{
    cover_from_report, directed_windows, strip_cover, verify_line_constancy, ConstancyReport, ContainmentCheck, PairDiagnostics,
    StripCover,
};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::diophantine::{delta_box, enumerate_band, AttachedPoint, ConstructionParams};
use crate::error::{Error, Result};
use crate::geometry::{Region, Square, Strip};
use crate::quad::Quad;
use crate::trees::{TreeShape, Vertex};

/// Default depth limit of the tessellated tree.
pub const DEFAULT_DEPTH_LIMIT: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tessellation {
    params: ConstructionParams,
    root: Square,
    shape: TreeShape,
}

/// A vertex together with its square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSquare {
    pub vertex: Vertex,
    pub square: Square,
    pub level: u32,
}

/// Outcome of the removal test for one vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivalReport {
    pub vertex: Vertex,
    pub removed_points: Vec<AttachedPoint>,
    pub survived: bool,
}

/// Survival of the `m²` children of one color block, from a single enumeration over the block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSurvival {
    pub color: u32,
    /// Surviving child indices, in grid order.
    pub survivors: Vec<u32>,
    /// Band points whose boxes meet the block.
    pub removed_points: Vec<AttachedPoint>,
}

/// Position of a child inside its parent's grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridCell {
    pub col: u32,
    pub row: u32,
}

impl Tessellation {
    /// `root` must have side `l`.
    pub fn new(params: ConstructionParams, root: Square) -> Result<Self> {
        if root.side() != params.l() {
            return Err(Error::InvalidGeometry(format!(
                "root side {} differs from l = {}",
                root.side(),
                params.l()
            )));
        }
        if params.blocks_per_side() == 0 {
            return Err(Error::InvalidParams("[R/m] = 0: no block fits in a square".into()));
        }
        let shape = TreeShape::new(params.successors(), params.colors(), DEFAULT_DEPTH_LIMIT)?;
        Ok(Self { params, root, shape })
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn root(&self) -> &Square {
        &self.root
    }

    pub fn shape(&self) -> &TreeShape {
        &self.shape
    }

    /// `[R/m]`.
    pub fn blocks_per_side(&self) -> u32 {
        self.params.blocks_per_side()
    }

    /// `m[R/m]`.
    pub fn children_per_side(&self) -> u32 {
        self.params.children_per_side()
    }

    pub fn cell_of(&self, child: u32) -> GridCell {
        let m = self.params.m();
        let blocks = self.blocks_per_side();
        let b = child / (m * m);
        let within = child % (m * m);
        GridCell {
            col: (b % blocks) * m + within % m,
            row: (b / blocks) * m + within / m,
        }
    }

    pub fn child_at(&self, cell: GridCell) -> u32 {
        let m = self.params.m();
        let b = (cell.row / m) * self.blocks_per_side() + cell.col / m;
        b * m * m + (cell.row % m) * m + cell.col % m
    }

    pub fn color_of(&self, child: u32) -> u32 {
        self.shape.color_of(child)
    }

    /// Square of child `j` of a square.
    pub fn child_square(&self, parent: &Square, child: u32) -> Square {
        let side = parent.side() * self.params.r_inv();
        let cell = self.cell_of(child);
        let x0 = parent.x0() + &side.scale_int(&cell.col.into());
        let y0 = parent.y0() + &side.scale_int(&cell.row.into());
        Square::new(x0, y0, side).expect("child side is positive")
    }

    /// The `m × m` block of color `color` below a square.
    pub fn block_square(&self, parent: &Square, color: u32) -> Square {
        let m = self.params.m();
        let b = color - 1;
        let cell = parent.side() * self.params.r_inv();
        let block = cell.scale_int(&m.into());
        let x0 = parent.x0() + &block.scale_int(&(b % self.blocks_per_side()).into());
        let y0 = parent.y0() + &block.scale_int(&(b / self.blocks_per_side()).into());
        Square::new(x0, y0, block).expect("block side is positive")
    }

    pub fn node_square(&self, v: &Vertex) -> Result<NodeSquare> {
        if v.level() > self.shape.depth_limit() {
            return Err(Error::Precondition(format!("vertex level {} beyond the depth limit", v.level())));
        }
        let mut square = self.root.clone();
        for &j in v.path() {
            if j >= self.params.successors() {
                return Err(Error::Precondition(format!("child index {j} out of range")));
            }
            square = self.child_square(&square, j);
        }
        Ok(NodeSquare {
            vertex: v.clone(),
            square,
            level: v.level(),
        })
    }

    /// Least color whose block below `parent` lies inside `sigma`.
    ///
    /// Requires `sigma ⊆ Φ(parent)` and `side(sigma) ≥ 2m·(child side)`. The grid is
    /// block-aligned and leaves a margin below `m` cells at the upper and right edges,
    /// so some block always fits.
    pub fn block_in_square(&self, parent: &Vertex, sigma: &Square) -> Result<u32> {
        let parent_sq = self.node_square(parent)?.square;
        self.block_in_square_of(&parent_sq, sigma)
    }

    pub fn block_in_square_of(&self, parent: &Square, sigma: &Square) -> Result<u32> {
        if !parent.contains_square(sigma) {
            let margins = [
                sigma.x0() - parent.x0(),
                sigma.y0() - parent.y0(),
                &parent.x1() - &sigma.x1(),
                &parent.y1() - &sigma.y1(),
            ];
            return Err(Error::Precondition(format!(
                "sigma is not inside the parent square; margins (left, bottom, right, top) = ({}, {}, {}, {})",
                margins[0], margins[1], margins[2], margins[3]
            )));
        }
        let block = (parent.side() * self.params.r_inv()).scale_int(&self.params.m().into());
        let needed = block.scale_int(&2.into());
        if sigma.side() < &needed {
            return Err(Error::Precondition(format!(
                "sigma side {} is below 2m·lR^-n = {} (short by {})",
                sigma.side(),
                needed,
                &needed - sigma.side()
            )));
        }
        let blocks = BigInt::from(self.blocks_per_side());
        // block index range along one axis whose blocks lie inside [lo, hi]
        let range = |lo: Quad, hi: Quad| -> Option<(BigInt, BigInt)> {
            let first = (&lo / &block).ceil().max(BigInt::from(0));
            let last = ((&hi / &block).floor() - BigInt::one()).min(&blocks - BigInt::one());
            (first <= last).then_some((first, last))
        };
        let cols = range(sigma.x0() - parent.x0(), &sigma.x1() - parent.x0());
        let rows = range(sigma.y0() - parent.y0(), &sigma.y1() - parent.y0());
        match (cols, rows) {
            (Some((c, _)), Some((r, _))) => {
                let color = (r * &blocks + c + BigInt::one()).to_u32().expect("color fits in u32");
                debug_assert!(sigma.contains_square(&self.block_square(parent, color)));
                Ok(color)
            }
            _ => Err(Error::Violation(format!(
                "no color block of the parent lies inside sigma (side {})",
                sigma.side()
            ))),
        }
    }

    /// Removal test `Φ(v) ∩ ⋃_{P ∈ level n} Δ(P) = ∅` for a vertex of level `n ≥ 1`.
    pub fn survives(&self, v: &Vertex, budget: u64) -> Result<SurvivalReport> {
        if v.level() == 0 {
            return Err(Error::Precondition("survival is defined for levels n ≥ 1".into()));
        }
        let node = self.node_square(v)?;
        let removed_points = enumerate_band(&node.square, node.level, None, &self.params, budget)?;
        Ok(SurvivalReport {
            vertex: v.clone(),
            survived: removed_points.is_empty(),
            removed_points,
        })
    }

    /// Survival of every child of one color below `parent`.
    pub fn block_survival(&self, parent: &Vertex, color: u32, budget: u64) -> Result<BlockSurvival> {
        let parent_sq = self.node_square(parent)?.square;
        self.block_survival_of(&parent_sq, parent.level() + 1, color, budget)
    }

    /// As [`Tessellation::block_survival`], for a parent given by its square; `level`
    /// is the level of the children.
    pub fn block_survival_of(&self, parent: &Square, level: u32, color: u32, budget: u64) -> Result<BlockSurvival> {
        if color == 0 || color > self.params.colors() {
            return Err(Error::Precondition(format!("color {color} out of range")));
        }
        let block = self.block_square(parent, color);
        let removed_points = enumerate_band(&block, level, None, &self.params, budget)?;
        let boxes: Vec<_> = removed_points
            .iter()
            .map(|ap| delta_box(&ap.point, self.params.st(), self.params.c()))
            .collect();
        let survivors = self
            .shape
            .children_of_color(color)
            .filter(|&j| {
                let sq = self.child_square(parent, j);
                !boxes.iter().any(|b| b.intersects_square(&sq))
            })
            .collect();
        Ok(BlockSurvival {
            color,
            survivors,
            removed_points,
        })
    }

    /// Whether the square at `level` roots a type-(I) subtree of depth `depth` in the
    /// survivor tree (the square itself is assumed to survive).
    pub fn has_type_i_subtree(&self, square: &Square, level: u32, depth: u32, budget: u64) -> Result<bool> {
        if depth == 0 {
            return Ok(true);
        }
        for color in 1..=self.params.colors() {
            let block = self.block_survival_of(square, level + 1, color, budget)?;
            let mut found = false;
            for &j in &block.survivors {
                let child = self.child_square(square, j);
                if self.has_type_i_subtree(&child, level + 1, depth - 1, budget)? {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Number of depth-`k` descendants of `root` inside the type-(II) subtree given by
/// `choice` whose squares meet `strip`. Paths passed to `choice` are relative to `root`.
///
/// Only squares meeting the strip are refined, which is exact: a descendant meets the
/// strip only if its ancestors do. Each cell is first classified in double precision
/// with a generous error bound; cells too close to the strip boundary to decide that
/// way fall back to the exact test.
pub fn count_strip_hits<C>(tess: &Tessellation, root: &Square, choice: C, strip: &Strip, k: u32) -> u64
where
    C: Fn(&Vertex) -> u32,
{
    if !strip.intersects_square(root) {
        return 0;
    }
    let ctx = StripWalk {
        tess,
        strip,
        half_width: strip.half_width_f64(),
        choice,
    };
    ctx.walk(root, &Vertex::root(), k)
}

struct StripWalk<'a, C> {
    tess: &'a Tessellation,
    strip: &'a Strip,
    half_width: f64,
    choice: C,
}

/// Relative slack on double-precision strip evaluations.
const STRIP_FLOAT_SLACK: f64 = 1e-10;

impl<C: Fn(&Vertex) -> u32> StripWalk<'_, C> {
    fn walk(&self, sq: &Square, v: &Vertex, remaining: u32) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let color = (self.choice)(v);
        let block = self.tess.block_square(sq, color);
        let side = sq.side() * self.tess.params().r_inv();
        // f at the block corner and its increments per cell step
        let base = self.strip.eval(block.x0(), block.y0());
        let da = side.scale_int(self.strip.a());
        let db = side.scale_int(self.strip.b());
        let (bf, daf, dbf) = (base.to_f64(), da.to_f64(), db.to_f64());
        let m = self.tess.params().m();
        let err = STRIP_FLOAT_SLACK
            * (base.magnitude_f64() + f64::from(m + 1) * (da.magnitude_f64() + db.magnitude_f64()) + self.half_width);
        let h = self.half_width;
        let mut total = 0;
        for j in self.tess.shape().children_of_color(color) {
            let cell = self.tess.cell_of(j);
            let (i, r) = (f64::from(cell.col % m), f64::from(cell.row % m));
            let corner = bf + i * daf + r * dbf;
            let lo = corner + daf.min(0.0) + dbf.min(0.0);
            let hi = corner + daf.max(0.0) + dbf.max(0.0);
            let meets = if lo > h + err || hi < -h - err {
                false
            } else if lo <= h - err && hi >= -h + err {
                true
            } else {
                self.strip.intersects_square(&self.tess.child_square(sq, j))
            };
            if meets {
                let child = self.tess.child_square(sq, j);
                total += self.walk(&child, &v.child(j), remaining - 1);
            }
        }
        total
    }
}

/// `(3m − 2)^k`.
pub fn strip_hit_bound(m: u32, k: u32) -> BigInt {
    BigInt::from(3 * m - 2).pow(k)
}

/// Width `(2/3)·l·R^(−n)` of the strips covering level-`n` boxes.
pub fn cover_strip_width(params: &ConstructionParams, n: u32) -> Quad {
    params.side(n) * Quad::ratio(2, 3)
}

/// Checks `strip`'s width against `(2/3)·lR^(−n)`.
pub fn check_strip_width(params: &ConstructionParams, strip: &Strip, n: u32) -> Result<()> {
    let expected = cover_strip_width(params, n);
    if strip.width() != &expected {
        return Err(Error::Precondition(format!("strip width {} differs from (2/3)lR^-{n} = {expected}", strip.width())));
    }
    if !strip.width().is_positive() {
        return Err(Error::Precondition("strip width must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
