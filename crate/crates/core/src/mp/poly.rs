//! Dense real polynomials, coefficients in increasing degree.

use rug::Float;

pub fn eval(p: &[Float], u: &Float) -> Float {
    let prec = p.first().map_or(u.prec(), |c| c.prec());
    let mut acc = Float::with_val(prec, 0);
    for c in p.iter().rev() {
        acc *= u;
        acc += c;
    }
    acc
}

pub fn mul(a: &[Float], b: &[Float]) -> Vec<Float> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let prec = a[0].prec().max(b[0].prec());
    let mut out = vec![Float::with_val(prec, 0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Float::with_val(prec, x * y);
        }
    }
    out
}

pub fn derivative(p: &[Float]) -> Vec<Float> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| Float::with_val(c.prec(), c * i as u32))
        .collect()
}

/// Antiderivative vanishing at 0.
pub fn integral(p: &[Float]) -> Vec<Float> {
    let prec = p.first().map_or(64, |c| c.prec());
    let mut out = vec![Float::with_val(prec, 0)];
    out.extend(p.iter().enumerate().map(|(i, c)| Float::with_val(prec, c / (i as u32 + 1))));
    out
}

/// a·p + q, padded to the longer length.
pub fn axpy(a: &Float, p: &[Float], q: &[Float]) -> Vec<Float> {
    let prec = a.prec();
    (0..p.len().max(q.len()))
        .map(|i| {
            let mut v = Float::with_val(prec, 0);
            if let Some(x) = p.get(i) {
                v += Float::with_val(prec, a * x);
            }
            if let Some(y) = q.get(i) {
                v += y;
            }
            v
        })
        .collect()
}

/// Coefficients of the Laguerre polynomial L_n(u) = Σ C(n,i) (-u)^i / i!.
pub fn laguerre_coefficients(n: u32, prec: u32) -> Vec<Float> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut c = Float::with_val(prec, 1);
    for i in 0..=n {
        out.push(c.clone());
        // c_{i+1} = -c_i (n-i) / (i+1)^2
        c *= n as i64 - i as i64;
        c = -c;
        c /= (i + 1) * (i + 1);
    }
    out
}
