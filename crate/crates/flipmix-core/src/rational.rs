//! Exact rational helpers: parsing decimal strings, fixed-precision
//! rendering, and directed decimal rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact rational number used throughout the crate.
pub type Rat = BigRational;

/// `num/den` from machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"0.324"`, `"-12"`, `"1.5"`, or `"num/den"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let s = s.trim();
    let err = |msg: &str| Error::Parse {
        line: 0,
        message: format!("{msg}: {s:?}"),
    };
    if s.is_empty() {
        return Err(err("empty rational"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rat::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(err("non-digit character"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mantissa: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| err("bad digits"))?
    };
    let denom = BigInt::from(10).pow(frac_part.len() as u32);
    Ok(Rat::new(mantissa * sign, denom))
}

/// Smallest multiple of `10^-places` that is `>= r`.
pub fn round_up_at(r: &Rat, places: u32) -> Rat {
    let scale = Rat::from(BigInt::from(10).pow(places));
    (r * &scale).ceil() / scale
}

/// Largest multiple of `10^-places` that is `<= r`.
pub fn round_down_at(r: &Rat, places: u32) -> Rat {
    let scale = Rat::from(BigInt::from(10).pow(places));
    (r * &scale).floor() / scale
}

/// f64 approximation (sampling and curve output only).
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders `r` exactly: as a terminating decimal when the reduced
/// denominator is 10-smooth, otherwise as `num/den`.
pub fn render_exact(r: &Rat) -> String {
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d != BigInt::from(1) {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let m = twos.max(fives);
    if m == 0 {
        return r.numer().to_string();
    }
    let mantissa = r.numer() * BigInt::from(10).pow(m) / r.denom();
    let neg = mantissa.is_negative();
    let digits = mantissa.abs().to_string();
    let digits = if digits.len() <= m as usize {
        format!("{}{}", "0".repeat(m as usize + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = digits.len() - m as usize;
    let frac = digits[split..].trim_end_matches('0');
    let body = if frac.is_empty() {
        digits[..split].to_string()
    } else {
        format!("{}.{}", &digits[..split], frac)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Renders `r` to `sig` significant digits, half-up, trimming trailing
/// fractional zeros. Exact whenever `r` terminates within `sig` digits.
pub fn render_decimal(r: &Rat, sig: usize) -> String {
    assert!(sig > 0, "need at least one significant digit");
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let ten = BigInt::from(10);
    let (n, d) = (a.numer().clone(), a.denom().clone());

    // Exponent e with 10^e <= a < 10^(e+1).
    let mut e = n.to_string().len() as i64 - d.to_string().len() as i64;
    loop {
        let at_least = |exp: i64| -> bool {
            if exp >= 0 {
                n >= &d * ten.pow(exp as u32)
            } else {
                &n * ten.pow((-exp) as u32) >= d
            }
        };
        if !at_least(e) {
            e -= 1;
        } else if at_least(e + 1) {
            e += 1;
        } else {
            break;
        }
    }

    // Round a * 10^(sig-1-e) half-up to an integer of exactly sig digits.
    let shift = sig as i64 - 1 - e;
    let (num, den) = if shift >= 0 {
        (&n * ten.pow(shift as u32), d.clone())
    } else {
        (n.clone(), &d * ten.pow((-shift) as u32))
    };
    let mut q = (BigInt::from(2) * &num + &den) / (BigInt::from(2) * &den);
    if q >= ten.pow(sig as u32) {
        q = ten.pow(sig as u32 - 1);
        e += 1;
    }
    let digits = q.to_string();
    debug_assert_eq!(digits.len(), sig);

    let body = if e >= sig as i64 - 1 {
        let zeros = (e - (sig as i64 - 1)) as usize;
        format!("{digits}{}", "0".repeat(zeros))
    } else if e >= 0 {
        let split = (e + 1) as usize;
        let frac = digits[split..].trim_end_matches('0');
        if frac.is_empty() {
            digits[..split].to_string()
        } else {
            format!("{}.{}", &digits[..split], frac)
        }
    } else {
        let leading = (-e - 1) as usize;
        let frac = format!("{}{}", "0".repeat(leading), digits);
        let frac = frac.trim_end_matches('0');
        format!("0.{frac}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}
