use serde::Serialize;

use crate::configs::{GramData, PointConfig};
use crate::exactnum::QuadExt;

use super::StructureError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PackingReport {
    pub n: usize,
    pub d: usize,
    /// Largest `|⟨x,y⟩|` over distinct points.
    pub coherence: QuadExt,
    pub welch: Option<QuadExt>,
    pub levenstein: Option<QuadExt>,
    pub etf: bool,
    pub levenstein_equality: bool,
}

/// `√((n−d)/(d(n−1)))`, for `n > d`.
pub fn welch_bound(n: usize, d: usize) -> Option<QuadExt> {
    if n <= d || d == 0 {
        return None;
    }
    QuadExt::from_frac((n - d) as i64, (d * (n - 1)) as i64).sqrt()
}

/// `√((3n−d(d+2))/((d+2)(n−d)))`, for `n > d(d+1)/2`.
pub fn levenstein_alpha(n: usize, d: usize) -> Option<QuadExt> {
    if 2 * n <= d * (d + 1) {
        return None;
    }
    let num = 3 * n as i64 - (d * (d + 2)) as i64;
    if num <= 0 {
        return None;
    }
    QuadExt::from_frac(num, ((d + 2) * (n - d)) as i64).sqrt()
}

pub fn packing_report(config: &PointConfig) -> Result<PackingReport, StructureError> {
    Ok(packing_report_gram(&config.gram()?))
}

pub fn packing_report_gram(gram: &GramData) -> PackingReport {
    let (n, d) = (gram.size(), gram.dim());
    let angles = gram.angles();
    let coherence = angles.iter().map(QuadExt::abs).max().unwrap_or_else(QuadExt::zero);
    let welch = welch_bound(n, d);
    let levenstein = levenstein_alpha(n, d);
    let etf = matches!(&welch, Some(w) if angles.iter().all(|a| a.abs() == *w));
    let levenstein_equality = matches!(&levenstein, Some(a) if coherence == *a
        && angles.iter().all(|g| g.is_zero() || g.abs() == *a));
    PackingReport { n, d, coherence, welch, levenstein, etf, levenstein_equality }
}
