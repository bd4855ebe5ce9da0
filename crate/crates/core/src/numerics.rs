//! Arbitrary-precision scalars.
//!
//! Every computation carries an explicit [`Precision`]; there is no global
//! precision state. Values are MPFR floats rounded to `digits + guard`
//! decimal digits.

use crate::error::{Error, Result};
use rug::float::Special;
use rug::ops::PowAssign;
use rug::{Assign, Complex, Float};

pub type BigReal = Float;
pub type BigComplex = Complex;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Working precision: `digits` significant decimal digits plus `guard` extra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    digits: u32,
    guard: u32,
}

impl Precision {
    pub const DEFAULT_GUARD: u32 = 30;
    pub const MIN_DIGITS: u32 = 30;
    pub const MIN_GUARD: u32 = 10;

    pub fn new(digits: u32, guard: u32) -> Result<Self> {
        if digits < Self::MIN_DIGITS {
            return Err(Error::InvalidInput(format!(
                "working precision {digits} below {} digits",
                Self::MIN_DIGITS
            )));
        }
        if guard < Self::MIN_GUARD {
            return Err(Error::InvalidInput(format!(
                "guard {guard} below {} digits",
                Self::MIN_GUARD
            )));
        }
        Ok(Self { digits, guard })
    }

    pub fn with_digits(digits: u32) -> Result<Self> {
        Self::new(digits, Self::DEFAULT_GUARD)
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard(&self) -> u32 {
        self.guard
    }

    /// Total decimal digits carried, `D + g`.
    pub fn total(&self) -> u32 {
        self.digits + self.guard
    }

    pub fn bits(&self) -> u32 {
        (f64::from(self.total()) * LOG2_10).ceil() as u32 + 8
    }

    pub fn real<T>(&self, value: T) -> BigReal
    where
        BigReal: Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn zero(&self) -> BigReal {
        Float::new(self.bits())
    }

    pub fn complex<T>(&self, value: T) -> BigComplex
    where
        BigComplex: Assign<T>,
    {
        Complex::with_val(self.bits(), value)
    }

    pub fn pi(&self) -> BigReal {
        Float::with_val(self.bits(), rug::float::Constant::Pi)
    }

    /// `10^e`.
    pub fn pow10(&self, e: i32) -> BigReal {
        let mut x = self.real(10);
        x.pow_assign(e);
        x
    }

    /// Re-round a value of any precision to this context.
    pub fn adopt(&self, x: &BigReal) -> BigReal {
        Float::with_val(self.bits(), x)
    }

    pub fn adopt_complex(&self, z: &BigComplex) -> BigComplex {
        Complex::with_val(self.bits(), z)
    }

    pub fn parse(&self, text: &str) -> Result<BigReal> {
        parse_decimal(text, self)
    }

    pub fn format(&self, x: &BigReal) -> String {
        format_decimal(x, self)
    }
}

fn is_decimal_literal(text: &str) -> bool {
    let s = text.strip_prefix(['+', '-']).unwrap_or(text);
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let mut parts = mantissa.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next().unwrap_or("");
    let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() && frac.is_empty() || !digits_ok(int) || !digits_ok(frac) {
        return false;
    }
    match exponent {
        None => true,
        Some(e) => {
            let e = e.strip_prefix(['+', '-']).unwrap_or(e);
            !e.is_empty() && digits_ok(e)
        }
    }
}

/// Parse a finite decimal literal (`-12.5e-3`) rounded to the context.
pub fn parse_decimal(text: &str, ctx: &Precision) -> Result<BigReal> {
    let trimmed = text.trim();
    if !is_decimal_literal(trimmed) {
        return Err(Error::Parse {
            text: text.to_string(),
        });
    }
    let parsed = Float::parse(trimmed).map_err(|_| Error::Parse {
        text: text.to_string(),
    })?;
    let mut x = ctx.real(parsed);
    if x.is_zero() {
        x.assign(Special::Zero);
    }
    Ok(x)
}

fn render(negative: bool, digits: &str, exp: i32) -> String {
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let mut out = String::with_capacity(digits.len() + 8);
    if negative {
        out.push('-');
    }
    out.push_str(&digits[..1]);
    if digits.len() > 1 {
        out.push('.');
        out.push_str(&digits[1..]);
    }
    let sci = exp - 1;
    if sci != 0 {
        out.push('e');
        out.push_str(&sci.to_string());
    }
    out
}

fn to_text(x: &BigReal, n: Option<usize>) -> String {
    let (neg, digits, exp) = x.to_sign_string_exp(10, n);
    render(neg, &digits, exp.unwrap_or(0))
}

/// Shortest decimal text of at most `D + g` digits that parses back to `x`
/// bit for bit; falls back to the full round-trip digit count.
pub fn format_decimal(x: &BigReal, ctx: &Precision) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let x = ctx.adopt(x);
    let round_trips = |n: usize| {
        let text = to_text(&x, Some(n));
        matches!(parse_decimal(&text, ctx), Ok(y) if y == x)
    };
    let max = ctx.total() as usize;
    if !round_trips(max) {
        return to_text(&x, None);
    }
    let (mut lo, mut hi) = (1usize, max);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if round_trips(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    to_text(&x, Some(hi))
}

/// Principal-branch power `exp(c · Log z)`.
pub fn complex_power(z: &BigComplex, c: &BigReal) -> Result<BigComplex> {
    let (re, im) = (z.real(), z.imag());
    if re.is_zero() && im.is_zero() {
        return Err(Error::Domain("complex power of zero".into()));
    }
    if im.is_zero() && re.is_sign_negative() {
        return Err(Error::Domain(
            "complex power on the branch cut (-inf, 0]".into(),
        ));
    }
    let mut w = z.clone();
    w.ln_mut();
    w *= c;
    w.exp_mut();
    Ok(w)
}

/// `log10 |x|` as a double, valid far outside the f64 exponent range.
pub fn log10_abs(x: &BigReal) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let mut y = Float::with_val(64, x.abs_ref());
    y.log10_mut();
    y.to_f64()
}

pub fn log10_abs_complex(z: &BigComplex) -> f64 {
    let mut y = Float::with_val(64, z.abs_ref());
    if y.is_zero() {
        return f64::NEG_INFINITY;
    }
    y.log10_mut();
    y.to_f64()
}
