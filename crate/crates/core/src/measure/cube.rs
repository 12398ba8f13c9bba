use serde::{Deserialize, Serialize};

/// Axis-aligned half-open cube `Π [lo_k, hi_k)`.
///
/// Bounds are stored explicitly so dyadic cubes computed from integer indices
/// share their faces bit-for-bit with their neighbours.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    lo: Vec<f64>,
    hi: Vec<f64>,
    side: f64,
}

impl Cube {
    /// Cube with the given corners; the side is taken from the first axis.
    pub fn from_bounds(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        let side = hi[0] - lo[0];
        Self { lo, hi, side }
    }

    /// Cube of side `side` centered at `center`.
    pub fn centered(center: &[f64], side: f64) -> Self {
        let h = side / 2.0;
        Self {
            lo: center.iter().map(|c| c - h).collect(),
            hi: center.iter().map(|c| c + h).collect(),
            side,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// `√n · ℓ`.
    pub fn diam(&self) -> f64 {
        (self.dim() as f64).sqrt() * self.side
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v < *b)
    }

    #[inline]
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Concentric cube with side scaled by `factor`. `dilate(1.0)` returns
    /// identical bounds.
    pub fn dilate(&self, factor: f64) -> Cube {
        let grow = (factor - 1.0) * self.side / 2.0;
        Cube {
            lo: self.lo.iter().map(|a| a - grow).collect(),
            hi: self.hi.iter().map(|b| b + grow).collect(),
            side: self.side * factor,
        }
    }

    /// Euclidean distance from `x` to the closed cube.
    pub fn distance_to_point(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((v, a), b) in x.iter().zip(&self.lo).zip(&self.hi) {
            let d = if v < a {
                a - v
            } else if v > b {
                v - b
            } else {
                0.0
            };
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Whether the closures of the two cubes intersect.
    pub fn closure_intersects(&self, other: &Cube) -> bool {
        (0..self.dim()).all(|k| self.lo[k] <= other.hi[k] && other.lo[k] <= self.hi[k])
    }

    /// The `2ⁿ` corners, in binary order of the axis bits.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|k| if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] })
                    .collect()
            })
            .collect()
    }

    /// Points on a regular `(m+1)ⁿ` lattice over the closed cube.
    pub fn lattice(&self, m: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let per = m + 1;
        let total = per.pow(n as u32);
        (0..total)
            .map(|mut t| {
                (0..n)
                    .map(|k| {
                        let i = t % per;
                        t /= per;
                        if i == m {
                            self.hi[k]
                        } else {
                            self.lo[k] + (self.hi[k] - self.lo[k]) * i as f64 / m as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

impl AsRef<Cube> for Cube {
    fn as_ref(&self) -> &Cube {
        self
    }
}

/// Origin and side of the level-0 cube of a dyadic grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicRoot {
    pub corner: Vec<f64>,
    pub side: f64,
}

/// Dyadic cube at `level` with integer `index`: side `root.side · 2^-level`,
/// lower corner `root.corner + index · side`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: Vec<i64>,
    pub root: DyadicRoot,
}

impl DyadicCube {
    pub fn root_cube(root: DyadicRoot) -> Self {
        let n = root.corner.len();
        Self {
            level: 0,
            index: vec![0; n],
            root,
        }
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// Exact power-of-two scaling of the root side.
    pub fn side(&self) -> f64 {
        self.root.side * 2f64.powi(-(self.level as i32))
    }

    pub fn to_cube(&self) -> Cube {
        let s = self.side();
        let lo = self
            .index
            .iter()
            .zip(&self.root.corner)
            .map(|(&i, &c)| c + i as f64 * s)
            .collect();
        let hi = self
            .index
            .iter()
            .zip(&self.root.corner)
            .map(|(&i, &c)| c + (i + 1) as f64 * s)
            .collect();
        Cube { lo, hi, side: s }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.to_cube().contains(x)
    }

    /// The `2ⁿ` children, in binary order of the axis bits.
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| DyadicCube {
                level: self.level + 1,
                index: (0..n).map(|k| 2 * self.index[k] + (mask >> k & 1) as i64).collect(),
                root: self.root.clone(),
            })
            .collect()
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube {
            level: self.level - 1,
            index: self.index.iter().map(|i| i.div_euclid(2)).collect(),
            root: self.root.clone(),
        })
    }

    /// Index of the ancestor at `level` (which must not exceed `self.level`).
    pub fn ancestor_index(&self, level: u32) -> Vec<i64> {
        let shift = self.level - level;
        self.index.iter().map(|i| i >> shift).collect()
    }

    fn int_bounds(&self, level: u32) -> impl Iterator<Item = (i64, i64)> + '_ {
        let shift = level - self.level;
        self.index.iter().map(move |&i| (i << shift, (i + 1) << shift))
    }

    /// Interiors intersect (exact integer test).
    pub fn interiors_overlap(&self, other: &DyadicCube) -> bool {
        let l = self.level.max(other.level);
        self.int_bounds(l)
            .zip(other.int_bounds(l))
            .all(|((a0, a1), (b0, b1))| a0 < b1 && b0 < a1)
    }

    /// Closures intersect but interiors do not (exact integer test).
    pub fn touches(&self, other: &DyadicCube) -> bool {
        let l = self.level.max(other.level);
        let closed = self
            .int_bounds(l)
            .zip(other.int_bounds(l))
            .all(|((a0, a1), (b0, b1))| a0 <= b1 && b0 <= a1);
        closed && !self.interiors_overlap(other)
    }
}
