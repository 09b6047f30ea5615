use super::{NormSpec, Parity, Series};

/// L² inner product of two tuples, summed over components.
pub fn inner_product<P: Parity>(a: &[Series<P>], b: &[Series<P>]) -> f64 {
    assert_eq!(a.len(), b.len(), "tuple length mismatch");
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Norm of a tuple: square root of the summed squared component norms.
pub fn tuple_norm<P: Parity>(series: &[Series<P>], spec: &NormSpec) -> f64 {
    series
        .iter()
        .map(|s| s.weighted_norm_sq(spec))
        .sum::<f64>()
        .sqrt()
}

/// Splits `r` into `(v·r) v` and the remainder. `v` is normalized here, so
/// any non-zero direction is accepted.
pub fn project_kernel<P: Parity>(
    r: &[Series<P>],
    v: &[Series<P>],
) -> (Vec<Series<P>>, Vec<Series<P>>) {
    let vv = inner_product(v, v);
    assert!(vv > 0.0, "kernel direction must be non-zero");
    let coef = inner_product(r, v) / vv;
    let proj: Vec<Series<P>> = v.iter().map(|vi| vi.scaled(coef)).collect();
    let rest = r.iter().zip(&proj).map(|(ri, pi)| ri - pi).collect();
    (proj, rest)
}
