//! Pair weights of the limit formulas.

use crate::model::CorrelationSpec;
use crate::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn sel(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Pair weight of the plain Toeplitz formula.
pub fn theta_plain(eps_r: i32, eps_s: i32, spec: &CorrelationSpec) -> C64 {
    let rho = |i| spec.rho(i);
    if eps_r != eps_s {
        c(spec.sigma_x2 + spec.sigma_y2, 0.0)
    } else {
        c(rho(2) - rho(5), eps_r as f64 * (rho(3) + rho(4)))
    }
}

/// Pair weight for Toeplitz letters between backward identities.
///
/// `nu_*` are the segment signs, `positive` is the sign of `z_r`. Whether `z_r = z_s` or
/// `z_r = -z_s` follows from the signs.
pub fn theta_tp(eps_r: i32, eps_s: i32, nu_r: i32, nu_s: i32, positive: bool, spec: &CorrelationSpec) -> C64 {
    let rho = |i| spec.rho(i);
    let (sx, sy) = (spec.sigma_x2, spec.sigma_y2);
    let de = sel(eps_r == eps_s);
    let dn = sel(nu_r == nu_s);
    let (er, es) = (eps_r as f64, eps_s as f64);
    let equal = eps_r * eps_s * nu_r * nu_s == -1;
    match (equal, positive) {
        (true, true) => c(sx + sy, 0.0) * dn * (1.0 - de) + c(sx - sy, er * 2.0 * rho(1)) * (1.0 - dn) * de,
        (true, false) => c(sx + sy, 0.0) * dn * (1.0 - de) + c(sx - sy, er * 2.0 * rho(6)) * (1.0 - dn) * de,
        (false, true) => {
            c(rho(2) + rho(5), er * (rho(4) - rho(3))) * (1.0 - dn) * (1.0 - de)
                + c(rho(2) - rho(5), er * (rho(4) + rho(3))) * dn * de
        }
        (false, false) => {
            c(rho(2) + rho(5), es * (rho(4) - rho(3))) * (1.0 - dn) * (1.0 - de)
                + c(rho(2) - rho(5), es * (rho(4) + rho(3))) * dn * de
        }
    }
}

/// Pair weight for symmetric Hankel letters. `equal` is `z_r = z_s`, `positive` the sign
/// of `z_r`.
pub fn theta_h(eps_r: i32, eps_s: i32, equal: bool, positive: bool, spec: &CorrelationSpec) -> C64 {
    let rho = |i| spec.rho(i);
    let (sx, sy) = (spec.sigma_x2, spec.sigma_y2);
    let de = sel(eps_r == eps_s);
    let (er, es) = (eps_r as f64, eps_s as f64);
    match (equal, positive) {
        (true, true) => c(sx + sy, 0.0) * (1.0 - de) + c(sx - sy, er * 2.0 * rho(1)) * de,
        (true, false) => c(sx + sy, 0.0) * (1.0 - de) + c(sx - sy, er * 2.0 * rho(6)) * de,
        (false, true) => {
            c(rho(2) + rho(5), er * (rho(4) - rho(3))) * (1.0 - de) + c(rho(2) - rho(5), er * (rho(4) + rho(3))) * de
        }
        (false, false) => {
            c(rho(2) + rho(5), es * (rho(4) - rho(3))) * (1.0 - de) + c(rho(2) - rho(5), es * (rho(4) + rho(3))) * de
        }
    }
}

/// `1` on `[max(0, -z), (1 - z) / 2]`.
#[inline]
pub fn in_a(w: f64, z: f64) -> bool {
    w >= (-z).max(0.0) && w <= 0.5 * (1.0 - z)
}

/// `1` on `[(1 - z) / 2, min(1 - z, 1)]`.
#[inline]
pub fn in_b(w: f64, z: f64) -> bool {
    w > 0.5 * (1.0 - z) && w <= (1.0 - z).min(1.0)
}

/// One letter of a generalized pair: its sign, its column `w` and its displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSite {
    pub eps: i32,
    pub w: f64,
    pub disp: f64,
}

fn f_terms(r: GenSite, s: GenSite) -> [f64; 4] {
    let (ar, br) = (sel(in_a(r.w, r.disp)), sel(in_b(r.w, r.disp)));
    let (as_, bs) = (sel(in_a(s.w, s.disp)), sel(in_b(s.w, s.disp)));
    [ar * as_, ar * bs, br * as_, br * bs]
}

/// Pair weight of the generalized Toeplitz formula, indicators included.
pub fn gen_weight_t(r: GenSite, s: GenSite, spec: &CorrelationSpec) -> C64 {
    if r.eps == s.eps {
        return C64::new(0.0, 0.0);
    }
    let rho = |i| spec.rho(i);
    let [f1, f2, f3, f4] = f_terms(r, s);
    let cr = c(rho(2) + rho(6), -(r.eps as f64) * (rho(3) - rho(4)));
    let cs = c(rho(2) + rho(6), -(s.eps as f64) * (rho(3) - rho(4)));
    c(f1 + f4, 0.0) + cr * f2 + cs * f3
}

/// Pair weight of the generalized Hankel formula. `nu` are the position signs; the
/// columns and displacements in the sites are the `T_g` ones each letter acts with.
pub fn gen_weight_h(r: GenSite, s: GenSite, nu_r: i32, nu_s: i32, spec: &CorrelationSpec) -> C64 {
    if nu_r == nu_s {
        return C64::new(0.0, 0.0);
    }
    let rho = |i| spec.rho(i);
    let [f1, f2, f3, f4] = f_terms(r, s);
    let (er, es) = (r.eps as f64, s.eps as f64);
    if r.eps != s.eps {
        c(f1 + f4, 0.0)
            + c(rho(2) + rho(6), er * (rho(4) - rho(3))) * f2
            + c(rho(2) + rho(6), es * (rho(4) - rho(3))) * f3
    } else {
        let skew = 2.0 * spec.sigma_x2 - 1.0;
        c(skew, er * 2.0 * rho(1)) * f1
            + c(skew, er * 2.0 * rho(5)) * f4
            + c(rho(2) - rho(6), er * (rho(4) + rho(3))) * f2
            + c(rho(2) - rho(6), es * (rho(4) + rho(3))) * f3
    }
}
