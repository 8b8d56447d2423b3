//! Symmetries of the standard cubes `[-1,1]^n` for n = 1, 2, 3.
//!
//! A symmetry is a signed permutation of the coordinate axes. We encode it as
//! `(perm, flip)` where `perm[j]` is the source axis feeding target axis `j`
//! and `flip[j]` negates that coordinate. Edges carry a bare direction flag,
//! squares one of the 8 elements of the dihedral group, 3-cubes one of 48.

use serde::{Deserialize, Serialize};

/// Direction flag for 1-cubes: `+1` preserves the intrinsic orientation.
pub type Dir = i8;

pub fn check_dir(d: Dir) -> bool {
    d == 1 || d == -1
}

/// Signed permutation of `N` axes acting by `y[j] = ±x[perm[j]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym<const N: usize> {
    pub perm: [usize; N],
    pub flip: [bool; N],
}

pub type SquareSym = Sym<2>;
pub type CubeSym = Sym<3>;

impl<const N: usize> Sym<N> {
    pub fn identity() -> Self {
        let mut perm = [0; N];
        for (j, p) in perm.iter_mut().enumerate() {
            *p = j;
        }
        Sym { perm, flip: [false; N] }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let mut perm = [0; N];
        let mut flip = [false; N];
        for j in 0..N {
            perm[j] = other.perm[self.perm[j]];
            flip[j] = self.flip[j] ^ other.flip[self.perm[j]];
        }
        Sym { perm, flip }
    }

    pub fn inverse(&self) -> Self {
        let mut perm = [0; N];
        let mut flip = [false; N];
        for j in 0..N {
            perm[self.perm[j]] = j;
            flip[self.perm[j]] = self.flip[j];
        }
        Sym { perm, flip }
    }

    /// Action on corners. Corner index has bit `i` set when coordinate `i` is `+1`.
    pub fn corner(&self, c: usize) -> usize {
        let mut out = 0;
        for j in 0..N {
            let bit = (c >> self.perm[j]) & 1 != 0;
            if bit ^ self.flip[j] {
                out |= 1 << j;
            }
        }
        out
    }

    /// Action on points of `R^N`, for cross-checks in tests.
    pub fn point(&self, x: &[f64; N]) -> [f64; N] {
        let mut y = [0.0; N];
        for j in 0..N {
            y[j] = if self.flip[j] { -x[self.perm[j]] } else { x[self.perm[j]] };
        }
        y
    }

    /// Image of the edge of `I^N` with free axis `a` and fixed signs
    /// `fixed[i]` for axes `i != a` (`fixed[a]` ignored). Returns
    /// `(free axis, fixed signs, direction)` of the image edge.
    pub fn edge(&self, a: usize, fixed: [bool; N]) -> (usize, [bool; N], Dir) {
        let mut a_out = usize::MAX;
        let mut dir = 1;
        let mut fixed_out = [false; N];
        for j in 0..N {
            if self.perm[j] == a {
                a_out = j;
                dir = if self.flip[j] { -1 } else { 1 };
            } else {
                fixed_out[j] = fixed[self.perm[j]] ^ self.flip[j];
            }
        }
        (a_out, fixed_out, dir)
    }
}

impl Sym<2> {
    const PERMS2: [[usize; 2]; 2] = [[0, 1], [1, 0]];

    pub fn index(&self) -> u8 {
        let p = if self.perm == [0, 1] { 0 } else { 1 };
        p * 4 + (self.flip[0] as u8) + 2 * (self.flip[1] as u8)
    }

    pub fn from_index(i: u8) -> Option<Self> {
        if i >= 8 {
            return None;
        }
        Some(Sym {
            perm: Self::PERMS2[(i / 4) as usize],
            flip: [i & 1 != 0, i & 2 != 0],
        })
    }

    pub fn all() -> impl Iterator<Item = Sym<2>> {
        (0..8).map(|i| Sym::<2>::from_index(i).unwrap())
    }
}

impl Sym<3> {
    const PERMS3: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];

    pub fn index(&self) -> u8 {
        let p = Self::PERMS3.iter().position(|q| *q == self.perm).unwrap() as u8;
        p * 8 + (self.flip[0] as u8) + 2 * (self.flip[1] as u8) + 4 * (self.flip[2] as u8)
    }

    pub fn from_index(i: u8) -> Option<Self> {
        if i >= 48 {
            return None;
        }
        Some(Sym {
            perm: Self::PERMS3[(i / 8) as usize],
            flip: [i & 1 != 0, i & 2 != 0, i & 4 != 0],
        })
    }

    pub fn all() -> impl Iterator<Item = Sym<3>> {
        (0..48).map(|i| Sym::<3>::from_index(i).unwrap())
    }

    /// Image of the face `{x[axis] = sign}`: `(axis, sign)` of the image face.
    pub fn face(&self, axis: usize, pos: bool) -> (usize, bool) {
        let j = self.perm.iter().position(|&p| p == axis).unwrap();
        (j, pos ^ self.flip[j])
    }

    /// The square symmetry induced on face charts: `p_{face'}^{-1} ∘ g ∘ p_face`,
    /// where a face chart lists the two free axes in increasing order.
    pub fn face_chart(&self, axis: usize, pos: bool) -> (usize, bool, Sym<2>) {
        let (axis_out, pos_out) = self.face(axis, pos);
        let free_in: Vec<usize> = (0..3).filter(|&i| i != axis).collect();
        let free_out: Vec<usize> = (0..3).filter(|&i| i != axis_out).collect();
        let mut perm = [0usize; 2];
        let mut flip = [false; 2];
        for k in 0..2 {
            let target_axis = free_out[k];
            let source_axis = self.perm[target_axis];
            perm[k] = free_in.iter().position(|&f| f == source_axis).unwrap();
            flip[k] = self.flip[target_axis];
        }
        (axis_out, pos_out, Sym { perm, flip })
    }
}

/// Serialization wrappers: square symmetries travel as `0..7`, cube
/// symmetries as `0..47`, edge directions as `+1 | -1`.
impl Serialize for Sym<2> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.index())
    }
}

impl<'de> Deserialize<'de> for Sym<2> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let i = u8::deserialize(d)?;
        Sym::<2>::from_index(i).ok_or_else(|| serde::de::Error::custom("square symmetry out of range 0..7"))
    }
}

impl Serialize for Sym<3> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.index())
    }
}

impl<'de> Deserialize<'de> for Sym<3> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let i = u8::deserialize(d)?;
        Sym::<3>::from_index(i).ok_or_else(|| serde::de::Error::custom("cube symmetry out of range 0..47"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for g in Sym::<2>::all() {
            assert_eq!(Sym::<2>::from_index(g.index()), Some(g));
        }
        for g in Sym::<3>::all() {
            assert_eq!(Sym::<3>::from_index(g.index()), Some(g));
        }
        assert_eq!(Sym::<2>::all().count(), 8);
        assert_eq!(Sym::<3>::all().count(), 48);
    }

    #[test]
    fn group_laws() {
        let all: Vec<Sym<3>> = Sym::<3>::all().collect();
        for g in &all {
            assert_eq!(g.compose(&g.inverse()), Sym::identity());
            assert_eq!(g.inverse().compose(g), Sym::identity());
        }
        let x = [0.25, -0.5, 0.75];
        for g in &all {
            for h in &all {
                let lhs = g.compose(h).point(&x);
                let rhs = g.point(&h.point(&x));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn corner_action_matches_points() {
        for g in Sym::<3>::all() {
            for c in 0..8usize {
                let x = [
                    if c & 1 != 0 { 1.0 } else { -1.0 },
                    if c & 2 != 0 { 1.0 } else { -1.0 },
                    if c & 4 != 0 { 1.0 } else { -1.0 },
                ];
                let y = g.point(&x);
                let mut expect = 0;
                for (j, v) in y.iter().enumerate() {
                    if *v > 0.0 {
                        expect |= 1 << j;
                    }
                }
                assert_eq!(g.corner(c), expect);
            }
        }
    }

    #[test]
    fn edge_action_matches_points() {
        for g in Sym::<2>::all() {
            for a in 0..2usize {
                for f in [false, true] {
                    let mut fixed = [false; 2];
                    fixed[1 - a] = f;
                    let (a2, fixed2, dir) = g.edge(a, fixed);
                    // midpoint of the edge moves to midpoint of the image
                    let mut mid = [0.0; 2];
                    mid[1 - a] = if f { 1.0 } else { -1.0 };
                    let out = g.point(&mid);
                    assert_eq!(out[a2], 0.0);
                    assert_eq!(out[1 - a2] > 0.0, fixed2[1 - a2]);
                    // direction: a point displaced along the free axis
                    let mut p = mid;
                    p[a] = 0.5;
                    let q = g.point(&p);
                    assert_eq!(q[a2] > 0.0, dir == 1);
                }
            }
        }
    }

    #[test]
    fn face_chart_consistency() {
        // char_C ∘ p_F' ∘ rho == g ∘ p_F pointwise on the face square
        for g in Sym::<3>::all() {
            for axis in 0..3usize {
                for pos in [false, true] {
                    let (axis2, pos2, rho) = g.face_chart(axis, pos);
                    let free_in: Vec<usize> = (0..3).filter(|&i| i != axis).collect();
                    let free_out: Vec<usize> = (0..3).filter(|&i| i != axis2).collect();
                    for u in [[-0.5, 0.25], [1.0, -1.0], [0.0, 0.75]] {
                        // p_F(u)
                        let mut x = [0.0; 3];
                        x[axis] = if pos { 1.0 } else { -1.0 };
                        x[free_in[0]] = u[0];
                        x[free_in[1]] = u[1];
                        let gx = g.point(&x);
                        // p_F'(rho(u))
                        let ru = rho.point(&u);
                        let mut y = [0.0; 3];
                        y[axis2] = if pos2 { 1.0 } else { -1.0 };
                        y[free_out[0]] = ru[0];
                        y[free_out[1]] = ru[1];
                        assert_eq!(gx, y);
                    }
                }
            }
        }
    }
}
