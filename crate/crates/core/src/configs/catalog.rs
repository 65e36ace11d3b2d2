use super::{nordstrom_robinson, ConfigError, Point, PointConfig};
use crate::exactnum::{rat, QuadExt};

pub const CATALOG_NAMES: [&str; 8] =
    ["hexagon", "icosahedron", "d4_min", "e6_min", "e7_min", "e8_min", "etf_7_28_design", "mub16"];

fn ints(v: &[i64]) -> Point {
    v.iter().map(|&x| QuadExt::from_int(x)).collect()
}

fn halves(v: &[i64]) -> Point {
    v.iter().map(|&x| QuadExt::from_frac(x, 2)).collect()
}

/// `±e_i ± e_j` in `R^n`.
fn pm_pairs(n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut v = vec![0; n];
                v[i] = si;
                v[j] = sj;
                out.push(v);
            }
        }
    }
    out
}

/// `(±1)^8` sign patterns, as doubled half-integer vectors.
fn sign_patterns() -> impl Iterator<Item = Vec<i64>> {
    (0..256u32).map(|m| (0..8).map(|i| if m >> i & 1 == 1 { -1 } else { 1 }).collect())
}

fn e8_roots() -> Vec<Point> {
    let mut pts: Vec<Point> = pm_pairs(8).iter().map(|v| ints(v)).collect();
    pts.extend(sign_patterns().filter(|v| v.iter().filter(|&&x| x < 0).count() % 2 == 0).map(|v| halves(&v)));
    pts
}

fn hexagon() -> Result<PointConfig, ConfigError> {
    let h = QuadExt::new(rat(0, 1), rat(1, 2), 3);
    let half = QuadExt::from_frac(1, 2);
    let pts = vec![
        vec![QuadExt::one(), QuadExt::zero()],
        vec![half.clone(), h.clone()],
        vec![-&half, h.clone()],
        vec![QuadExt::from_int(-1), QuadExt::zero()],
        vec![-&half, -&h],
        vec![half, -h],
    ];
    PointConfig::new(2, None, pts, QuadExt::one(), "hexagon")
}

fn icosahedron() -> Result<PointConfig, ConfigError> {
    let phi = QuadExt::new(rat(1, 2), rat(1, 2), 5);
    let mut pts = Vec::new();
    for s1 in [1, -1] {
        for s2 in [1, -1] {
            let a = QuadExt::from_int(s1);
            let b = &phi * &QuadExt::from_int(s2);
            let z = QuadExt::zero();
            pts.push(vec![z.clone(), a.clone(), b.clone()]);
            pts.push(vec![a.clone(), b.clone(), z.clone()]);
            pts.push(vec![b, z, a]);
        }
    }
    let norm2 = QuadExt::one() + &phi * &phi;
    PointConfig::new(3, None, pts, norm2, "icosahedron")
}

fn d4_min() -> Result<PointConfig, ConfigError> {
    let pts = pm_pairs(4).iter().map(|v| ints(v)).collect();
    PointConfig::new(4, None, pts, QuadExt::from_int(2), "d4_min")
}

/// E6 as the E8 roots with equal last three coordinates.
fn e6_min() -> Result<PointConfig, ConfigError> {
    let pts = e8_roots().into_iter().filter(|p| p[5] == p[6] && p[6] == p[7]).collect();
    PointConfig::new(6, Some(8), pts, QuadExt::from_int(2), "e6_min")
}

/// E7 as the E8 roots orthogonal to the all-ones vector.
fn e7_min() -> Result<PointConfig, ConfigError> {
    let pts = e8_roots()
        .into_iter()
        .filter(|p| p.iter().fold(QuadExt::zero(), |a, x| a + x).is_zero())
        .collect();
    PointConfig::new(7, Some(8), pts, QuadExt::from_int(2), "e7_min")
}

fn e8_min() -> Result<PointConfig, ConfigError> {
    PointConfig::new(8, None, e8_roots(), QuadExt::from_int(2), "e8_min")
}

/// `±(4(e_i + e_j) − 1)`: two coordinates 3 and six −1, in the sum-zero
/// hyperplane of `R^8`.
fn etf_7_28_design() -> Result<PointConfig, ConfigError> {
    let mut pts = Vec::new();
    for i in 0..8 {
        for j in i + 1..8 {
            let mut v = vec![-1i64; 8];
            v[i] = 3;
            v[j] = 3;
            pts.push(ints(&v));
            pts.push(ints(&v.iter().map(|x| -x).collect::<Vec<_>>()));
        }
    }
    PointConfig::new(7, Some(8), pts, QuadExt::from_int(24), "etf_7_28_design")
}

/// `±4 e_i` together with the Nordstrom–Robinson words as `±1` vectors.
fn mub16() -> Result<PointConfig, ConfigError> {
    let mut pts = Vec::new();
    for i in 0..16 {
        for s in [4, -4] {
            let mut v = vec![0i64; 16];
            v[i] = s;
            pts.push(ints(&v));
        }
    }
    pts.extend(nordstrom_robinson()?.sign_vectors().iter().map(|v| ints(v)));
    PointConfig::new(16, None, pts, QuadExt::from_int(16), "mub16")
}

pub fn catalog(name: &str) -> Result<PointConfig, ConfigError> {
    match name {
        "hexagon" => hexagon(),
        "icosahedron" => icosahedron(),
        "d4_min" => d4_min(),
        "e6_min" => e6_min(),
        "e7_min" => e7_min(),
        "e8_min" => e8_min(),
        "etf_7_28_design" => etf_7_28_design(),
        "mub16" => mub16(),
        other => Err(ConfigError::UnknownCatalogName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::antipodal_split;

    fn f(p: i64, q: i64) -> QuadExt {
        QuadExt::from_frac(p, q)
    }

    #[test]
    fn sizes_and_dimensions() {
        let expect = [
            ("hexagon", 6, 2),
            ("icosahedron", 12, 3),
            ("d4_min", 24, 4),
            ("e6_min", 72, 6),
            ("e7_min", 126, 7),
            ("e8_min", 240, 8),
            ("etf_7_28_design", 56, 7),
            ("mub16", 288, 16),
        ];
        for (name, size, dim) in expect {
            let c = catalog(name).unwrap();
            assert_eq!((c.len(), c.dim()), (size, dim), "{name}");
            assert!(c.is_antipodal(), "{name}");
        }
        assert!(matches!(catalog("leech"), Err(ConfigError::UnknownCatalogName(_))));
    }

    // Expected angle sets come from a direct enumeration in Python.
    #[test]
    fn angle_sets() {
        let angles = |n: &str| catalog(n).unwrap().gram().unwrap().angles();
        assert_eq!(angles("hexagon"), vec![f(-1, 1), f(-1, 2), f(1, 2)]);
        assert_eq!(angles("e8_min"), vec![f(-1, 1), f(-1, 2), f(0, 1), f(1, 2)]);
        assert_eq!(angles("d4_min"), vec![f(-1, 1), f(-1, 2), f(0, 1), f(1, 2)]);
        assert_eq!(angles("e6_min"), vec![f(-1, 1), f(-1, 2), f(0, 1), f(1, 2)]);
        assert_eq!(angles("e7_min"), vec![f(-1, 1), f(-1, 2), f(0, 1), f(1, 2)]);
        assert_eq!(angles("etf_7_28_design"), vec![f(-1, 1), f(-1, 3), f(1, 3)]);
        assert_eq!(angles("mub16"), vec![f(-1, 1), f(-1, 4), f(0, 1), f(1, 4)]);
        let s5 = QuadExt::sqrt_int(5);
        assert_eq!(angles("icosahedron"), vec![f(-1, 1), -(&s5 / &QuadExt::from_int(5)), &s5 / &QuadExt::from_int(5)]);
    }

    #[test]
    fn antipodal_halves() {
        let (half, flag) = antipodal_split(&catalog("e8_min").unwrap()).unwrap();
        assert!(flag);
        assert_eq!(half.len(), 120);
        let (half, flag) = antipodal_split(&catalog("hexagon").unwrap()).unwrap();
        assert!(flag);
        assert_eq!(half.len(), 3);
    }

    // 256 ±1 words split into 8 blocks of 16 mutually orthogonal vectors after
    // antipodal splitting (distance 8 ⟺ orthogonal); with the coordinate
    // frame this gives 9 orthonormal bases.
    #[test]
    fn mub16_decomposes_into_nine_bases() {
        let c = catalog("mub16").unwrap();
        let (half, _) = antipodal_split(&c).unwrap();
        let g = half.gram().unwrap();
        let n = half.len();
        let mut unused: Vec<usize> = (0..n).collect();
        let mut blocks = Vec::new();
        while let Some(&seed) = unused.first() {
            let mut block = vec![seed];
            for &j in &unused[1..] {
                if block.iter().all(|&i| g.entry(i, j).is_zero()) {
                    block.push(j);
                }
            }
            unused.retain(|x| !block.contains(x));
            blocks.push(block);
        }
        assert_eq!(blocks.len(), 9);
        for (a, block) in blocks.iter().enumerate() {
            assert_eq!(block.len(), 16);
            let sub = g.sub(block);
            assert_eq!(sub.values(), &[f(0, 1), f(1, 1)]);
            for other in &blocks[a + 1..] {
                for &i in block {
                    for &j in other {
                        let v = g.entry(i, j);
                        assert!(*v == f(1, 4) || *v == f(-1, 4));
                    }
                }
            }
        }
    }
}
