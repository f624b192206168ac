//! Integer geometry of the hexagonal lattice.
//!
//! Cells use axial coordinates `(q, r)`. Edge `e` of a cell faces the
//! neighbor at `cell + DIRECTIONS[e]`, where each direction is the previous
//! one rotated by 60 degrees via `(q, r) -> (-r, q + r)`. Corner `k` is the
//! vertex between edges `k` and `k + 1`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Axial offsets of the six neighbors, indexed by edge.
pub const DIRECTIONS: [AxialCell; 6] = [
    AxialCell::new(1, 0),
    AxialCell::new(0, 1),
    AxialCell::new(-1, 1),
    AxialCell::new(-1, 0),
    AxialCell::new(0, -1),
    AxialCell::new(1, -1),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("degenerate torus basis u={u}, v={v}: determinant is zero")]
    DegenerateBasis { u: AxialCell, v: AxialCell },
    #[error("index {0} is outside 0..5")]
    BadIndex(i64),
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct AxialCell {
    pub q: i32,
    pub r: i32,
}

impl AxialCell {
    pub const ORIGIN: AxialCell = AxialCell { q: 0, r: 0 };

    pub const fn new(q: i32, r: i32) -> Self {
        AxialCell { q, r }
    }

    pub fn neighbor(self, e: EdgeIndex) -> AxialCell {
        self + DIRECTIONS[e.index()]
    }

    pub fn neighbors(self) -> impl Iterator<Item = AxialCell> {
        EdgeIndex::ALL.into_iter().map(move |e| self.neighbor(e))
    }

    /// Rotates about the origin by `k` steps of 60 degrees counterclockwise.
    pub fn rotate(self, k: i64) -> AxialCell {
        let mut c = self;
        for _ in 0..k.rem_euclid(6) {
            c = AxialCell::new(-c.r, c.q + c.r);
        }
        c
    }

    /// Hex (step) distance from the origin.
    pub fn norm(self) -> u32 {
        let (q, r) = (self.q as i64, self.r as i64);
        q.abs().max(r.abs()).max((q + r).abs()) as u32
    }

    pub fn distance(self, other: AxialCell) -> u32 {
        (self - other).norm()
    }
}

impl fmt::Display for AxialCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q, self.r)
    }
}

impl Add for AxialCell {
    type Output = AxialCell;
    fn add(self, o: AxialCell) -> AxialCell {
        AxialCell::new(self.q + o.q, self.r + o.r)
    }
}

impl Sub for AxialCell {
    type Output = AxialCell;
    fn sub(self, o: AxialCell) -> AxialCell {
        AxialCell::new(self.q - o.q, self.r - o.r)
    }
}

impl Neg for AxialCell {
    type Output = AxialCell;
    fn neg(self) -> AxialCell {
        AxialCell::new(-self.q, -self.r)
    }
}

impl Mul<i32> for AxialCell {
    type Output = AxialCell;
    fn mul(self, k: i32) -> AxialCell {
        AxialCell::new(self.q * k, self.r * k)
    }
}

pub fn neighbor(c: AxialCell, e: EdgeIndex) -> AxialCell {
    c.neighbor(e)
}

pub fn opposite(e: EdgeIndex) -> EdgeIndex {
    e.opposite()
}

pub fn rotate_cell(c: AxialCell, k: i64) -> AxialCell {
    c.rotate(k)
}

macro_rules! hex_index {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(try_from = "u8", into = "u8")]
        pub struct $name(u8);

        impl $name {
            pub const ALL: [$name; 6] = [$name(0), $name(1), $name(2), $name(3), $name(4), $name(5)];

            pub fn new(i: usize) -> Result<Self, GridError> {
                if i < 6 {
                    Ok($name(i as u8))
                } else {
                    Err(GridError::BadIndex(i as i64))
                }
            }

            /// Reduces any integer mod 6.
            pub fn wrap(i: i64) -> Self {
                $name(i.rem_euclid(6) as u8)
            }

            pub fn index(self) -> usize {
                self.0 as usize
            }

            pub fn rotate(self, k: i64) -> Self {
                Self::wrap(self.0 as i64 + k)
            }
        }

        impl TryFrom<u8> for $name {
            type Error = GridError;
            fn try_from(v: u8) -> Result<Self, GridError> {
                Self::new(v as usize)
            }
        }

        impl From<$name> for u8 {
            fn from(v: $name) -> u8 {
                v.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

hex_index!(
    /// One of the six edges of a cell; edge `e` faces `DIRECTIONS[e]`.
    EdgeIndex
);
hex_index!(
    /// One of the six corners of a cell; corner `k` sits between edges `k` and `k + 1`.
    CornerIndex
);

impl EdgeIndex {
    pub fn opposite(self) -> EdgeIndex {
        self.rotate(3)
    }

    pub fn direction(self) -> AxialCell {
        DIRECTIONS[self.index()]
    }
}

impl CornerIndex {
    /// The three cells sharing corner `k` of `cell`.
    pub fn cells_around(self, cell: AxialCell) -> [AxialCell; 3] {
        let e = EdgeIndex::wrap(self.0 as i64);
        [cell, cell.neighbor(e), cell.neighbor(e.rotate(1))]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    Hex { radius: u32 },
    Cells,
}

/// A finite set of cells, either a hexagonal ball or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    kind: RegionKind,
    cells: BTreeSet<AxialCell>,
}

impl Region {
    pub fn hex(radius: u32) -> Region {
        let r = radius as i32;
        let mut cells = BTreeSet::new();
        for q in -r..=r {
            for s in (-r).max(-q - r)..=r.min(-q + r) {
                cells.insert(AxialCell::new(q, s));
            }
        }
        Region {
            kind: RegionKind::Hex { radius },
            cells,
        }
    }

    pub fn from_cells<I: IntoIterator<Item = AxialCell>>(cells: I) -> Region {
        Region {
            kind: RegionKind::Cells,
            cells: cells.into_iter().collect(),
        }
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    pub fn cells(&self) -> &BTreeSet<AxialCell> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: AxialCell) -> bool {
        self.cells.contains(&c)
    }
}

pub fn region_cells(radius: u32) -> Region {
    Region::hex(radius)
}

/// Two generators of a full-rank sublattice; the quotient is a torus with
/// `|det|` cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorusBasis {
    pub u: AxialCell,
    pub v: AxialCell,
}

/// Hermite normal form of a sublattice: generators `(a, 0)` and `(b, c)`
/// with `a, c > 0` and `0 <= b < a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Hermite {
    a: i64,
    b: i64,
    c: i64,
}

impl TorusBasis {
    pub fn new(u: AxialCell, v: AxialCell) -> Result<TorusBasis, GridError> {
        let b = TorusBasis { u, v };
        if b.det() == 0 {
            return Err(GridError::DegenerateBasis { u, v });
        }
        Ok(b)
    }

    pub fn det(&self) -> i64 {
        self.u.q as i64 * self.v.r as i64 - self.u.r as i64 * self.v.q as i64
    }

    pub fn cell_count(&self) -> usize {
        self.det().unsigned_abs() as usize
    }

    fn hermite(&self) -> Hermite {
        let (uq, ur, vq, vr) = (
            self.u.q as i64,
            self.u.r as i64,
            self.v.q as i64,
            self.v.r as i64,
        );
        let (g, x, y) = ext_gcd(ur, vr);
        let n = self.det().abs();
        if g == 0 {
            // Both generators lie on the q axis; only possible when det = 0.
            unreachable!("degenerate basis reached hermite()");
        }
        let c = g.abs();
        let sign = g.signum();
        let wq = sign * (x * uq + y * vq);
        let a = n / c;
        Hermite {
            a,
            b: wq.rem_euclid(a),
            c,
        }
    }

    /// The same lattice in Hermite normal form.
    pub fn canonical(&self) -> TorusBasis {
        let h = self.hermite();
        TorusBasis {
            u: AxialCell::new(h.a as i32, 0),
            v: AxialCell::new(h.b as i32, h.c as i32),
        }
    }

    /// Canonical representative of `cell` modulo the lattice, with
    /// `0 <= q < a` and `0 <= r < c` in Hermite coordinates.
    pub fn reduce(&self, cell: AxialCell) -> AxialCell {
        let h = self.hermite();
        let (q, r) = (cell.q as i64, cell.r as i64);
        let rr = r.rem_euclid(h.c);
        let k = (r - rr) / h.c;
        let qq = (q - k * h.b).rem_euclid(h.a);
        AxialCell::new(qq as i32, rr as i32)
    }

    /// All cell classes, in lexicographic order.
    pub fn classes(&self) -> Vec<AxialCell> {
        let h = self.hermite();
        let mut out = Vec::with_capacity((h.a * h.c) as usize);
        for q in 0..h.a {
            for r in 0..h.c {
                out.push(AxialCell::new(q as i32, r as i32));
            }
        }
        out
    }

    /// Every sublattice of index `1..=max_det`, each once, ordered by
    /// `(det, a, b)`.
    pub fn canonical_bases(max_det: u32) -> Vec<TorusBasis> {
        let mut out = Vec::new();
        for n in 1..=max_det as i32 {
            for a in 1..=n {
                if n % a != 0 {
                    continue;
                }
                let c = n / a;
                for b in 0..a {
                    out.push(TorusBasis {
                        u: AxialCell::new(a, 0),
                        v: AxialCell::new(b, c),
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for TorusBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u={} v={}", self.u, self.v)
    }
}

pub fn torus_reduce(c: AxialCell, b: &TorusBasis) -> AxialCell {
    b.reduce(c)
}

/// Returns `(g, x, y)` with `x*a + y*b = g` and `|g| = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        // a = (a div b)*b + a mod b, with Euclidean division
        let qd = (a - a.rem_euclid(b)) / b;
        (g, y, x - qd * y)
    }
}
