//! Reference values computed without the solvers they check.

/// `J_ν(x) Γ(ν+1) (2/x)^ν` from the ascending series. The dropped factor is
/// positive for `x > 0`, so the zeros are those of `J_ν`.
fn bessel_reduced(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    let mut m = 1.0;
    loop {
        term *= q / (m * (m + nu));
        sum += term;
        if m > x && term.abs() <= 1e-18 * sum.abs() {
            return sum;
        }
        m += 1.0;
    }
}

/// `n`-th positive zero of `J_ν` by a sign scan and bisection on the series.
pub fn bessel_zero(nu: f64, n: usize) -> f64 {
    const SCAN: f64 = 0.05;
    let mut found = 0;
    let mut a = SCAN;
    let mut fa = bessel_reduced(nu, a);
    loop {
        let b = a + SCAN;
        let fb = bessel_reduced(nu, b);
        if fa.signum() != fb.signum() {
            found += 1;
            if found == n {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                while hi - lo > 1e-15 * hi {
                    let mid = 0.5 * (lo + hi);
                    let fm = bessel_reduced(nu, mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
}

/// Matrix of the trace-free Lie derivative `X ↦ (L_X g)₀` of the flat cone
/// `dr² + (1+β)²r²dy²`, from the mode-1 covectors `r^ζ(η_r dr + η_ŷ (1+β)r dy)`
/// at `ζ = −1 + 1/(1+β)` to the trace-free tensors at `ζ − 1`, in the same
/// bases as [`crate::indicial::xbeta_ybeta_map`]. Derivatives are central
/// differences of the vector field in polar coordinates.
///
/// Also returns the largest defect of the images from the assumed
/// `r^{ζ−1}(c₀, c₁)` form at other sample points.
pub fn xy_map_by_differences(beta: f64) -> ([[f64; 2]; 2], f64) {
    const H: f64 = 1e-5;
    let a = 1.0 + beta;
    let zeta = -1.0 + 1.0 / a;
    // (η_r, η_ŷ) of the two source covectors.
    let sources: [fn(f64) -> (f64, f64); 2] = [|y| (y.cos(), -y.sin()), |y| (-y.sin(), -y.cos())];
    let mut matrix = [[0.0; 2]; 2];
    let mut defect: f64 = 0.0;
    for (col, eta) in sources.iter().enumerate() {
        // Raised with g = diag(1, a²r²).
        let field = |r: f64, y: f64| {
            let (er, ey) = eta(y);
            (r.powf(zeta) * er, r.powf(zeta) * ey / (a * r))
        };
        // Orthonormal components (φ₂, φ₃) of the trace-free part at (r, y).
        let image = |r: f64, y: f64| {
            let (xr, _) = field(r, y);
            let dr = |i: usize| {
                let (p, m) = (field(r + H, y), field(r - H, y));
                if i == 0 { (p.0 - m.0) / (2.0 * H) } else { (p.1 - m.1) / (2.0 * H) }
            };
            let dy = |i: usize| {
                let (p, m) = (field(r, y + H), field(r, y - H));
                if i == 0 { (p.0 - m.0) / (2.0 * H) } else { (p.1 - m.1) / (2.0 * H) }
            };
            let l_rr = 2.0 * dr(0);
            let l_yy = 2.0 * a * a * r * xr + 2.0 * a * a * r * r * dy(1);
            let l_ry = dy(0) + a * a * r * r * dr(1);
            let (h11, h22, h12) = (l_rr, l_yy / (a * a * r * r), l_ry / (a * r));
            (0.5 * (h11 - h22), h12)
        };
        // Y basis: φ₂ = c₀ cos y − c₁ sin y, φ₃ = −c₀ sin y − c₁ cos y.
        let (p2, p3) = image(1.0, 0.0);
        let (c0, c1) = (p2, -p3);
        matrix[0][col] = c0;
        matrix[1][col] = c1;
        for (r, y) in [(0.7f64, 0.4f64), (1.9, 2.3), (1.3, -1.1)] {
            let s = r.powf(zeta - 1.0);
            let (q2, q3) = image(r, y);
            let want = (s * (c0 * y.cos() - c1 * y.sin()), s * (-c0 * y.sin() - c1 * y.cos()));
            defect = defect.max((q2 - want.0).abs()).max((q3 - want.1).abs());
        }
    }
    (matrix, defect)
}

/// `{k/(1+β)} ∪ ⋃_s {s + k/(1+β)}` for the given shifts, inside the window.
pub fn closed_form_roots(beta: f64, shifts: &[f64], include_scalar: bool, window: (f64, f64)) -> Vec<f64> {
    let inv = 1.0 / (1.0 + beta);
    let reach = ((window.1.abs().max(window.0.abs()) + 3.0) / inv).ceil() as i64;
    let mut out = Vec::new();
    for k in -reach..=reach {
        let base = k as f64 * inv;
        let mut push = |v: f64| {
            if v >= window.0 - 1e-12 && v <= window.1 + 1e-12 {
                out.push(v);
            }
        };
        if include_scalar {
            push(base);
        }
        for s in shifts {
            push(s + base);
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    out
}
