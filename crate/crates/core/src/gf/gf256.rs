//! GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1, and
//! polynomials over it.

use std::fmt;
use std::ops::{Add, Mul};

use crate::error::GfError;

/// Reduction polynomial of the byte field, including the x^8 term.
pub const GF256_REDUCTION: u16 = 0x11b;

const fn build_tables() -> ([u8; 512], [u8; 256]) {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        exp[i + 255] = x as u8;
        log[x as usize] = i as u8;
        // multiply by the generator x + 1
        let mut y = (x << 1) ^ x;
        if y & 0x100 != 0 {
            y ^= GF256_REDUCTION;
        }
        x = y;
        i += 1;
    }
    exp[510] = exp[0];
    exp[511] = exp[1];
    (exp, log)
}

const TABLES: ([u8; 512], [u8; 256]) = build_tables();
static EXP: [u8; 512] = TABLES.0;
static LOG: [u8; 256] = TABLES.1;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub const ZERO: Gf256 = Gf256(0);
    pub const ONE: Gf256 = Gf256(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn inv(self) -> Option<Gf256> {
        if self.0 == 0 {
            None
        } else {
            Some(Gf256(EXP[255 - LOG[self.0 as usize] as usize]))
        }
    }

    pub fn pow(self, mut e: u32) -> Gf256 {
        let mut base = self;
        let mut acc = Gf256::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Add for Gf256 {
    type Output = Gf256;
    #[inline]
    fn add(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

impl Mul for Gf256 {
    type Output = Gf256;
    #[inline]
    fn mul(self, rhs: Gf256) -> Gf256 {
        if self.0 == 0 || rhs.0 == 0 {
            return Gf256(0);
        }
        Gf256(EXP[LOG[self.0 as usize] as usize + LOG[rhs.0 as usize] as usize])
    }
}

impl fmt::Debug for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

/// Polynomial over GF(2^8); `coeffs[i]` is the coefficient of `x^i`,
/// trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf256Poly {
    coeffs: Vec<Gf256>,
}

impl Gf256Poly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Gf256::ONE)
    }

    pub fn x() -> Self {
        Self::from_coeffs(vec![Gf256::ZERO, Gf256::ONE])
    }

    pub fn constant(c: Gf256) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn from_coeffs(coeffs: Vec<Gf256>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::from_coeffs(bytes.iter().map(|&b| Gf256(b)).collect())
    }

    pub fn coeffs(&self) -> &[Gf256] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Gf256 {
        self.coeffs.get(i).copied().unwrap_or(Gf256::ZERO)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [Gf256::ONE]
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&Gf256::ONE)
    }

    pub fn leading(&self) -> Option<Gf256> {
        self.coeffs.last().copied()
    }

    pub fn add(&self, other: &Gf256Poly) -> Gf256Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Gf256Poly::from_coeffs((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn scale(&self, c: Gf256) -> Gf256Poly {
        Gf256Poly::from_coeffs(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Gf256Poly) -> Gf256Poly {
        if self.is_zero() || other.is_zero() {
            return Gf256Poly::zero();
        }
        let mut out = vec![Gf256::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Gf256Poly::from_coeffs(out)
    }

    /// Squaring is additive in characteristic 2: `(sum a_i x^i)^2 = sum a_i^2 x^2i`.
    pub fn square(&self) -> Gf256Poly {
        let mut out = vec![Gf256::ZERO; (self.coeffs.len() * 2).saturating_sub(1)];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[2 * i] = a * a;
        }
        Gf256Poly::from_coeffs(out)
    }

    pub fn make_monic(&self) -> Gf256Poly {
        match self.leading() {
            None => Gf256Poly::zero(),
            Some(l) => self.scale(l.inv().expect("nonzero leading coefficient")),
        }
    }

    pub fn div_rem(&self, m: &Gf256Poly) -> Result<(Gf256Poly, Gf256Poly), GfError> {
        let dm = m
            .degree()
            .ok_or_else(|| GfError::InvalidArgument("division by the zero polynomial".into()))?;
        let lead_inv = m.leading().and_then(Gf256::inv).expect("trimmed");
        let mut r = self.coeffs.clone();
        if r.len() <= dm {
            return Ok((Gf256Poly::zero(), self.clone()));
        }
        let mut q = vec![Gf256::ZERO; r.len() - dm];
        for i in (dm..r.len()).rev() {
            let c = r[i];
            if c.is_zero() {
                continue;
            }
            let f = c * lead_inv;
            q[i - dm] = f;
            for (k, &mk) in m.coeffs.iter().enumerate() {
                r[i - dm + k] = r[i - dm + k] + f * mk;
            }
        }
        r.truncate(dm);
        Ok((Gf256Poly::from_coeffs(q), Gf256Poly::from_coeffs(r)))
    }

    pub fn rem(&self, m: &Gf256Poly) -> Result<Gf256Poly, GfError> {
        Ok(self.div_rem(m)?.1)
    }

    pub fn eval(&self, x: Gf256) -> Gf256 {
        self.coeffs
            .iter()
            .rev()
            .fold(Gf256::ZERO, |acc, &c| acc * x + c)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&Gf256::ZERO) {
            self.coeffs.pop();
        }
    }
}

impl fmt::Display for Gf256Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else {
            return f.write_str("0");
        };
        let mut first = true;
        for i in (0..=d).rev() {
            let c = self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let cs = if c == Gf256::ONE && i > 0 {
                String::new()
            } else {
                format!("{:02x}", c.0)
            };
            match i {
                0 => write!(f, "{cs}")?,
                1 => write!(f, "{cs}x")?,
                _ => write!(f, "{cs}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Gf256Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf256Poly({self})")
    }
}

pub fn gf256_mul_mod(a: &Gf256Poly, b: &Gf256Poly, m: &Gf256Poly) -> Result<Gf256Poly, GfError> {
    a.mul(b).rem(m)
}

/// Monic gcd.
pub fn gf256_gcd(a: &Gf256Poly, b: &Gf256Poly) -> Result<Gf256Poly, GfError> {
    if a.is_zero() && b.is_zero() {
        return Err(GfError::InvalidArgument("gcd(0, 0) is undefined".into()));
    }
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.rem(&b)?;
        a = b;
        b = r;
    }
    Ok(a.make_monic())
}
