//! Potentials for the Schrödinger-type operator `-L_a u + V u`.
//!
//! Four built-in families cover the laboratory's needs: the zero
//! potential, constants, polynomials in the coordinates, and powers of the
//! gauge distance.  Each knows how to evaluate itself and how to apply the
//! generator of the anisotropic dilations (`x·∇_x + (a+1) y·∇_y`), which
//! the integral identities need in closed form.

use crate::error::{Error, Result};
use crate::geometry::{gauge_norm, GrushinParams, Point};
use std::fmt;

/// One term `coeff · Π x_i^{x_exp[i]} · Π y_j^{y_exp[j]}` of a polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    /// Scalar coefficient.
    pub coeff: f64,
    /// Exponents of the first coordinate block, one per component.
    pub x_exp: Vec<u32>,
    /// Exponents of the second coordinate block, one per component.
    pub y_exp: Vec<u32>,
}

impl Monomial {
    fn eval(&self, p: &Point) -> f64 {
        let mut v = self.coeff;
        for (c, &e) in p.x.iter().zip(&self.x_exp) {
            v *= c.powi(e as i32);
        }
        for (c, &e) in p.y.iter().zip(&self.y_exp) {
            v *= c.powi(e as i32);
        }
        v
    }

    /// Weighted degree under the anisotropic dilations: plain degree in the
    /// first block plus `(a+1)` times the degree in the second.
    fn dilation_degree(&self, params: &GrushinParams) -> f64 {
        let dx: u32 = self.x_exp.iter().sum();
        let dy: u32 = self.y_exp.iter().sum();
        f64::from(dx) + params.ap1() * f64::from(dy)
    }
}

/// A polynomial in the grid coordinates, stored as a sum of monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    /// The terms; evaluation sums them in order.
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    /// Evaluates the polynomial at a point.
    pub fn eval(&self, p: &Point) -> f64 {
        self.terms.iter().map(|m| m.eval(p)).sum()
    }
}

/// A potential `V` entering the operator as `-L_a u + V u`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `V = 0`.
    Zero,
    /// `V = c`.
    Constant(f64),
    /// A polynomial in the coordinates.
    Polynomial(Polynomial),
    /// `V = coeff · d(z)^power` with `d` the gauge distance to the origin.
    /// Negative powers blow up at the origin; evaluation then returns a
    /// non-finite value which the solvers reject.
    RadialPower {
        /// Scalar prefactor.
        coeff: f64,
        /// Integer exponent of the gauge distance.
        power: i32,
    },
}

impl Potential {
    /// Evaluates the potential.  The result may be non-finite (for
    /// negative radial powers at the origin); assembly validates this.
    pub fn eval(&self, params: &GrushinParams, p: &Point) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(c) => *c,
            Potential::Polynomial(poly) => poly.terms.iter().map(|m| m.eval(p)).sum(),
            Potential::RadialPower { coeff, power } => match gauge_norm(params, p) {
                Ok(d) => coeff * d.powi(*power),
                Err(_) => f64::NAN,
            },
        }
    }

    /// Applies the dilation generator: `(x·∇_x + (a+1) y·∇_y) V`, in
    /// closed form.  Monomials are scaled by their weighted degree; gauge
    /// powers `d^p` are eigenfunctions of the generator with eigenvalue
    /// `p`.
    pub fn xg_applied(&self, params: &GrushinParams, p: &Point) -> f64 {
        match self {
            Potential::Zero | Potential::Constant(_) => 0.0,
            Potential::Polynomial(poly) => poly
                .terms
                .iter()
                .map(|m| m.dilation_degree(params) * m.eval(p))
                .sum(),
            Potential::RadialPower { power, .. } => {
                f64::from(*power) * self.eval(params, p)
            }
        }
    }

    /// Checks structural compatibility with the parameters (exponent
    /// vector lengths, finite coefficients).
    pub fn validate(&self, params: &GrushinParams) -> Result<()> {
        match self {
            Potential::Zero => Ok(()),
            Potential::Constant(c) => {
                if c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(
                        "constant potential value must be finite".into(),
                    ))
                }
            }
            Potential::Polynomial(poly) => {
                for m in &poly.terms {
                    if !m.coeff.is_finite() {
                        return Err(Error::InvalidArgument(
                            "polynomial potential coefficients must be finite".into(),
                        ));
                    }
                    if m.x_exp.len() != params.h || m.y_exp.len() != params.k {
                        return Err(Error::InvalidArgument(format!(
                            "polynomial potential term has exponent shape ({}, {}), expected ({}, {})",
                            m.x_exp.len(),
                            m.y_exp.len(),
                            params.h,
                            params.k
                        )));
                    }
                }
                Ok(())
            }
            Potential::RadialPower { coeff, .. } => {
                if coeff.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(
                        "radial potential coefficient must be finite".into(),
                    ))
                }
            }
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "zero"),
            Potential::Constant(c) => write!(f, "constant({c})"),
            Potential::Polynomial(p) => write!(f, "polynomial({p})"),
            Potential::RadialPower { coeff, power } => {
                write!(f, "radial-power({coeff} * d^{power})")
            }
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", m.coeff)?;
            for (j, &e) in m.x_exp.iter().enumerate() {
                if e > 0 {
                    write!(f, "*x{}", j + 1)?;
                    if e > 1 {
                        write!(f, "^{e}")?;
                    }
                }
            }
            for (j, &e) in m.y_exp.iter().enumerate() {
                if e > 0 {
                    write!(f, "*y{}", j + 1)?;
                    if e > 1 {
                        write!(f, "^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses a polynomial expression such as `1 + 2*x1^2*y1 - 0.5*x2`.
///
/// Grammar: terms joined by `+`/`-`; each term is a `*`-separated product
/// of numeric literals and variables `x<i>`/`y<j>` (1-based, bounded by the
/// block dimensions) with optional `^<uint>` exponents.
pub fn parse_polynomial(expr: &str, h: usize, k: usize) -> Result<Polynomial> {
    let src: Vec<char> = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if src.is_empty() {
        return Err(Error::InvalidArgument(
            "empty polynomial expression".into(),
        ));
    }
    let mut pos = 0usize;
    let mut terms = Vec::new();
    let err = |pos: usize, what: &str| {
        Error::InvalidArgument(format!(
            "polynomial expression: {what} at offset {pos} of '{expr}'"
        ))
    };
    while pos < src.len() {
        let mut sign = 1.0;
        // Leading sign of the term.
        while pos < src.len() && (src[pos] == '+' || src[pos] == '-') {
            if src[pos] == '-' {
                sign = -sign;
            }
            pos += 1;
        }
        if pos >= src.len() {
            return Err(err(pos, "dangling sign"));
        }
        let mut coeff = sign;
        let mut x_exp = vec![0u32; h];
        let mut y_exp = vec![0u32; k];
        loop {
            let c = src[pos];
            if c.is_ascii_digit() || c == '.' {
                let start = pos;
                while pos < src.len()
                    && (src[pos].is_ascii_digit()
                        || src[pos] == '.'
                        || src[pos] == 'e'
                        || src[pos] == 'E'
                        || ((src[pos] == '+' || src[pos] == '-')
                            && (src[pos - 1] == 'e' || src[pos - 1] == 'E')))
                {
                    pos += 1;
                }
                let lit: String = src[start..pos].iter().collect();
                let v: f64 = lit
                    .parse()
                    .map_err(|_| err(start, "invalid numeric literal"))?;
                coeff *= v;
            } else if c == 'x' || c == 'y' {
                pos += 1;
                let start = pos;
                while pos < src.len() && src[pos].is_ascii_digit() {
                    pos += 1;
                }
                let idx: usize = src[start..pos]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| err(start, "variable needs a 1-based index"))?;
                let bound = if c == 'x' { h } else { k };
                if idx == 0 || idx > bound {
                    return Err(err(
                        start,
                        &format!("variable {c}{idx} out of range (block dimension {bound})"),
                    ));
                }
                let mut e = 1u32;
                if pos < src.len() && src[pos] == '^' {
                    pos += 1;
                    let estart = pos;
                    while pos < src.len() && src[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    e = src[estart..pos]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| err(estart, "exponent must be a nonnegative integer"))?;
                }
                if c == 'x' {
                    x_exp[idx - 1] += e;
                } else {
                    y_exp[idx - 1] += e;
                }
            } else {
                return Err(err(pos, &format!("unexpected character '{c}'")));
            }
            if pos < src.len() && src[pos] == '*' {
                pos += 1;
                if pos >= src.len() {
                    return Err(err(pos, "dangling '*'"));
                }
            } else {
                break;
            }
        }
        terms.push(Monomial {
            coeff,
            x_exp,
            y_exp,
        });
        if pos < src.len() && src[pos] != '+' && src[pos] != '-' {
            return Err(err(pos, &format!("expected '+' or '-', found '{}'", src[pos])));
        }
    }
    Ok(Polynomial { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(h: usize, k: usize, alpha: u32) -> GrushinParams {
        GrushinParams::new(h, k, alpha).unwrap()
    }

    fn pt(x: &[f64], y: &[f64]) -> Point {
        Point::new(x.to_vec(), y.to_vec())
    }

    #[test]
    fn parses_and_evaluates() {
        let p = parse_polynomial("1 + 2*x1^2*y1 - 0.5*x2", 2, 1).unwrap();
        let params = params(2, 1, 1);
        let v = Potential::Polynomial(p);
        v.validate(&params).unwrap();
        // 1 + 2*(3^2)*5 - 0.5*(-2) = 1 + 90 + 1 = 92.
        assert_relative_eq!(
            v.eval(&params, &pt(&[3.0, -2.0], &[5.0])),
            92.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn parser_handles_signs_and_scientific_notation() {
        let p = parse_polynomial("-x1 + 1.5e-1*y1^3", 1, 1).unwrap();
        let v = Potential::Polynomial(p);
        assert_relative_eq!(
            v.eval(&params(1, 1, 0), &pt(&[2.0], &[2.0])),
            -2.0 + 0.15 * 8.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn parser_rejects_malformed_input() {
        assert!(parse_polynomial("", 1, 1).is_err());
        assert!(parse_polynomial("x3", 2, 1).is_err());
        assert!(parse_polynomial("y0", 1, 1).is_err());
        assert!(parse_polynomial("1 +", 1, 1).is_err());
        assert!(parse_polynomial("2*", 1, 1).is_err());
        assert!(parse_polynomial("x1 # y1", 1, 1).is_err());
        assert!(parse_polynomial("x1^-2", 1, 1).is_err());
    }

    #[test]
    fn dilation_generator_on_monomials() {
        // (x·∇_x + (a+1) y·∇_y) applied to x1^2 y1 with a = 2 multiplies
        // by 2 + 3 = 5.
        let params = params(1, 1, 2);
        let v = Potential::Polynomial(parse_polynomial("x1^2*y1", 1, 1).unwrap());
        let z = pt(&[1.5], &[-0.5]);
        assert_relative_eq!(
            v.xg_applied(&params, &z),
            5.0 * v.eval(&params, &z),
            max_relative = 1e-14
        );
    }

    #[test]
    fn radial_power_is_dilation_eigenfunction() {
        let params = params(1, 1, 1);
        let v = Potential::RadialPower {
            coeff: 2.0,
            power: 3,
        };
        let z = pt(&[0.7], &[0.3]);
        let d = gauge_norm(&params, &z).unwrap();
        assert_relative_eq!(v.eval(&params, &z), 2.0 * d.powi(3), max_relative = 1e-14);
        assert_relative_eq!(
            v.xg_applied(&params, &z),
            3.0 * v.eval(&params, &z),
            max_relative = 1e-14
        );
    }

    #[test]
    fn zero_and_constant() {
        let params = params(1, 1, 1);
        let z = pt(&[0.3], &[0.4]);
        assert_eq!(Potential::Zero.eval(&params, &z), 0.0);
        assert_eq!(Potential::Constant(4.5).eval(&params, &z), 4.5);
        assert_eq!(Potential::Constant(4.5).xg_applied(&params, &z), 0.0);
    }

    #[test]
    fn validate_catches_shape_mismatch() {
        let poly = Polynomial {
            terms: vec![Monomial {
                coeff: 1.0,
                x_exp: vec![1],
                y_exp: vec![0],
            }],
        };
        assert!(Potential::Polynomial(poly).validate(&params(2, 1, 1)).is_err());
    }

    #[test]
    fn display_round_trips_meaning() {
        let v = Potential::Polynomial(parse_polynomial("1 + 2*x1^2*y1", 1, 1).unwrap());
        assert_eq!(format!("{v}"), "polynomial(1 + 2*x1^2*y1)");
        assert_eq!(
            format!(
                "{}",
                Potential::RadialPower {
                    coeff: 1.5,
                    power: -2
                }
            ),
            "radial-power(1.5 * d^-2)"
        );
    }
}
