/// Nearest 0/1 design that still satisfies the volume fraction: elements are ranked
/// by density (descending, ties by lower index first) and the longest prefix of
/// nonzero-density elements whose total volume fits within `vf_target * V0` is set
/// to 1; everything else becomes 0.
pub fn threshold_project(rho: &[f64], volumes: &[f64], vf_target: f64) -> Vec<f64> {
    let total: f64 = volumes.iter().sum();
    let budget = vf_target * total * (1.0 + 1e-12);
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b)));
    let mut out = vec![0.0; rho.len()];
    let mut used = 0.0;
    for e in order {
        if rho[e] <= 0.0 || used + volumes[e] > budget {
            break;
        }
        used += volumes[e];
        out[e] = 1.0;
    }
    out
}
