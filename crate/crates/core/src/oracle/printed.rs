//! Equations as typeset, transcribed verbatim into the equation language of
//! [`super::parse`]. `G` is γ/β throughout; the Case 2 single equation also
//! uses `A = α/β` and `D = δ/β²` with explicit powers of β.

use super::parse::{parse_equation, Symbols};
use super::termsum::TermSum;
use crate::error::{Error, Result};
use crate::params::Regime;

pub const CASE1_KINEMATIC: &str = "eta_t + f_xx + G f_yy + alpha ((eta f_x)_x + G (eta f_y)_y)
  - 1/6 beta (f_4x + 2 G f_2x2y + G^2 f_4y) - delta ((h f_x)_x + G (h f_y)_y)";

pub const CASE1_DYNAMIC: &str =
    "eta + f_t + 1/2 alpha (f_x^2 + G f_y^2) - 1/2 beta (f_xxt + G f_yyt)";

/// Single equation before the zeroth-order replacement.
pub const CASE1_SCALAR_RAW: &str = "f_xx + G f_yy - f_tt
  - alpha (f_t (f_xx + G f_yy) + (f_x^2 + G f_y^2)_t)
  - beta (1/6 (f_4x + 2 G f_2x2y + G^2 f_4y) - 1/2 (f_xxtt + G f_yytt))
  - delta ((h f_x)_x + G (h f_y)_y)";

pub const CASE1_SCALAR: &str = "f_xx + G f_yy - f_tt
  - alpha (f_t (f_xx + G f_yy) + (f_x^2 + G f_y^2)_t)
  + beta (1/3 (f_4x + 2 G f_2x2y + G^2 f_4y))
  - delta ((h f_x)_x + G (h f_y)_y)";

pub const CASE1_ETA: &str = "-(f_t + 1/2 alpha (f_x^2 + G f_y^2) - 1/2 beta (f_xxt + G f_yyt))";

pub const CASE2_KINEMATIC: &str = "eta_t + f_xx + G f_yy + alpha ((eta f_x)_x + G (eta f_y)_y)
  - 1/6 beta (f_4x + 2 G f_2x2y + G^2 f_4y)
  - 1/2 alpha beta (eta f_3x)_x - 1/2 alpha gamma (eta_x f_x2y + 2 eta f_2x2y + eta_y f_2xy)
  - 1/120 beta^2 f_6x - 1/40 beta gamma (f_4x2y + G f_2x4y + 1/3 G^2 f_6y)
  - delta ((h f_x)_x + G (h f_y)_y)";

pub const CASE2_DYNAMIC: &str =
    "eta + f_t + 1/2 alpha (f_x^2 + G f_y^2) - 1/2 beta (f_xxt + G f_yyt)
  + alpha beta (1/2 (f_xx^2 - f_x f_3x) - eta f_xxt)
  + alpha gamma (eta f_yyt + f_xx f_yy - 1/2 (f_x f_xyy + f_y f_xxy) + G (f_yy^2 - f_y f_3y))
  + 1/24 beta^2 (f_4xt + 2 G f_2x2yt + G^2 f_4yt)";

pub const CASE2_ETA: &str = "-(f_t + 1/2 alpha (f_x^2 + G f_y^2) - 1/2 beta (f_xxt + G f_yyt)
  + alpha beta (1/2 (f_xx^2 - f_x f_3x))
  + alpha gamma (f_xx f_yy - 1/2 (f_x f_xyy + f_y f_xxy) + G (f_yy^2 - f_y f_3y))
  + 1/24 beta^2 (f_4xt + 2 G f_2x2yt + G^2 f_4yt))
  + f_t (alpha beta f_xxt + alpha gamma f_yyt)";

pub const CASE2_SCALAR: &str = "f_xx + G f_yy - f_tt - A G (f_tt f_yyt + f_t f_2y2t) - A (f_tt f_2xt + f_t f_2x2t)
 + beta ( - G A^2 ( f_yyt f_x f_xt + f_t f_x f_x2yt A^2 + f_t f_yyt f_xx + f_y f_xy f_2xt
                    + f_t f_yy f_2xt - f_t f_y f_2xyt + f_t f_yy )
          - G^2 A^2 ( f_y f_xy f_yyt + f_t f_yy f_yyt + f_t f_y f_3yt )
          - A^2 ( f_x f_xt f_2xt - f_t f_xx f_2xt - f_t f_x f_3xt )
          - 2 G A f_y f_xy - 2 f_x f_xt - A f_t f_xx + 1/2 G f_2y2t - 1/6 G^2 f_4y
          + 1/2 f_2x2t - 1/3 G f_2x2y - 1/6 f_4x )
 + beta^2 ( A^2 G^3 ( f_xy f_yyt f_3y + f_t f_3y f_3yt + f_t f_yyt f_4y ) + 1/120 G^3 f_6y
          + A^2 G^2 ( -3/2 f_y^2 f_yy + 1/2 f_yyt f_xt f_x2y + 1/2 f_t f_x2y f_x2yt + 1/2 f_xy f_3y f_2xt
                      + 1/2 f_t f_4y f_2xt + 1/2 f_xy f_yyt f_2xy + 1/2 f_t f_3yt f_2xy
                      + 1/2 f_t f_3y f_2xyt + f_t f_yyt f_2x2y )
          + A G^2 ( -1/2 f_yy f_yyt + f_xy f_3y + f_y f_3yt + 1/2 f_t f_4y )
          + A^2 G ( -1/2 f_yy f_x^2 - 1/2 f_y^2 f_xx + 1/2 f_xt f_x2y f_2xt + 1/2 f_xy f_2xt f_2xy
                    + 1/2 f_t f_2xy f_2xyt + 1/2 f_yyt f_xt f_3x + 1/2 f_t f_x2yt f_3x
                    + 1/2 f_t f_x2y f_3xt + 1/2 f_t f_yyt f_4x + f_t f_2xt f_2x2y - 2 f_y f_x f_xy )
          + G^2 ( -1/24 f_4y2t + 1/40 f_2x4y )
          + D G ( - h_h f_y - h f_yy ) - D ( h f_x + h f_xx )
          + A G ( f_xt f_x2y + f_x f_x2yt - 1/2 f_yyt f_xx - 1/2 f_yy f_2xt + f_xy f_2xy
                  + f_y f_2xyt + f_t f_2x2y )
          + G ( -1/12 f_2x2y2t + 1/40 f_4x2y )
          + A ( -1/2 f_xx f_2xt + f_xt f_3x + f_x f_3xt + 1/2 f_t f_4x )
          + A^2 ( 1/2 f_xt f_2xt f_3x + 1/2 f_t f_3x f_3xt + 1/2 f_t f_2xt f_4x )
          - 1/24 f_4x2t + 1/120 f_6x )";

/// The three typeset slips of [`CASE2_SCALAR`] with their readings: the extra
/// `A^2` on `f_t f_x f_x2yt`, `h_h` for `h_y`, and `h f_x` for `h_x f_x`.
pub const CASE2_SCALAR_SLIPS: &str = "beta (- G A^2 (A^2 - 1) f_t f_x f_x2yt)
  + beta^2 (D G (- h_h f_y + h_y f_y) - D (h f_x - h_x f_x))";

pub const CASE3_KINEMATIC: &str = "eta_t + f_xx - 1/6 beta f_4x + G f_yy + alpha (eta f_x)_x
  - 1/120 beta^2 f_6x - 1/3 gamma f_2x2y - delta (h f_x)_x";

pub const CASE3_DYNAMIC: &str =
    "eta + f_t - 1/2 beta f_xxt + 1/2 alpha f_x^2 + 1/24 beta^2 f_4xt - 1/2 gamma f_yyt";

pub const CASE3ST_DYNAMIC: &str = "eta + f_t - beta (1/2 f_xxt + tau eta_xx) + 1/2 alpha f_x^2
  + 1/24 beta^2 f_4xt - gamma (1/2 f_yyt + tau eta_yy)";

pub const CASE3_SCALAR: &str = "f_xx - f_tt + G f_yy + beta (1/2 f_xxtt - 1/6 f_4x)
  - beta^2 (1/24 f_4x2t + 1/120 f_6x) + gamma (-1/3 f_xxyy + 1/2 f_yytt)
  - alpha (2 f_x f_xt + f_t f_xx) - delta (h f_x)_x";

pub const CASE3_ETA: &str =
    "-(f_t - 1/2 beta f_xxt + 1/2 alpha f_x^2 + 1/24 beta^2 f_4xt - 1/2 gamma f_yyt)";

pub const CASE4_KINEMATIC: &str = "eta_t + f_xx + G f_yy + alpha ((eta f_x)_x + G (eta f_y)_y)
  - 1/6 beta (f_4x + G^2 f_4y) - 1/3 gamma f_2x2y - delta ((h f_x)_x + G (h f_y)_y)";

pub const CASE4_DYNAMIC: &str =
    "eta + f_t + 1/2 alpha (f_x^2 + G f_y^2) - 1/2 (beta f_xxt + gamma f_yyt)
  - tau (beta eta_xx + gamma eta_yy)";

pub const CASE4_SCALAR: &str = "f_xx + G f_yy - f_tt
  - alpha ((2 f_x f_xt + f_t f_xx) + G (2 f_y f_yt + f_t f_yy)) - delta ((h f_x)_x + (h f_y)_y)
  - 1/6 beta (f_4x + G^2 f_4y) + 1/2 beta f_xxtt + 1/2 gamma f_yytt - 1/3 gamma f_xxyy
  - alpha^2 (3/2 (f_x^2 f_xx + G^2 f_y^2 f_yy) + 1/2 G (f_x^2 f_yy + f_y^2 f_xx) + 4 f_x f_y f_xt)";

/// The recovery formula as typeset after τ is dropped (its α factor is
/// restored from the dynamic equation it is solved from).
pub const CASE4_ETA: &str = "-(f_t + 1/2 alpha (f_x^2 + G f_y^2) - 1/2 (beta f_xxt + gamma f_yyt))";

/// The two discrepancies of [`CASE4_SCALAR`] against its own pair: the bottom
/// block without the γ/β weight, and `4 f_x f_y f_xt` in place of `2 G f_x f_y f_xy`.
pub const CASE4_SCALAR_DISCREPANCIES: &str = "- delta (h f_y)_y + delta G (h f_y)_y
  - 4 alpha^2 f_x f_y f_xt + 2 alpha^2 G f_x f_y f_xy";

/// Symbols for the Case 2 single equation.
pub fn case2_symbols() -> Symbols {
    Symbols::standard()
        .with("A", [1, -1, 0, 0, 0])
        .with("D", [0, -2, 0, 1, 0])
}

pub fn parse(src: &str) -> Result<TermSum> {
    parse_equation(src, &case2_symbols())
}

/// `(kinematic, dynamic)` pair as typeset.
pub fn pair(r: Regime) -> Result<(TermSum, TermSum)> {
    let (k, d) = match r {
        Regime::Case1 => (CASE1_KINEMATIC, CASE1_DYNAMIC),
        Regime::Case2 => (CASE2_KINEMATIC, CASE2_DYNAMIC),
        Regime::Case3 => (CASE3_KINEMATIC, CASE3_DYNAMIC),
        Regime::Case3ST => (CASE3_KINEMATIC, CASE3ST_DYNAMIC),
        Regime::Case4 => (CASE4_KINEMATIC, CASE4_DYNAMIC),
    };
    Ok((parse(k)?, parse(d)?))
}

/// The single equation for f as typeset.
pub fn scalar(r: Regime) -> Result<TermSum> {
    match r {
        Regime::Case1 => parse(CASE1_SCALAR),
        Regime::Case2 => parse(CASE2_SCALAR),
        Regime::Case3 => parse(CASE3_SCALAR),
        Regime::Case4 => parse(CASE4_SCALAR),
        Regime::Case3ST => Err(Error::UnsupportedRegime(
            "case3st: eta cannot be expressed through f, there is no single equation".into(),
        )),
    }
}

/// The η-recovery formula as typeset.
pub fn eta_recovery(r: Regime) -> Result<TermSum> {
    match r {
        Regime::Case1 => parse(CASE1_ETA),
        Regime::Case2 => parse(CASE2_ETA),
        Regime::Case3 => parse(CASE3_ETA),
        Regime::Case4 => parse(CASE4_ETA),
        Regime::Case3ST => Err(Error::UnsupportedRegime(
            "case3st: no eta recovery from f".into(),
        )),
    }
}

/// Known typesetting discrepancies `printed − derived` of the single equation.
pub fn known_discrepancies(r: Regime) -> Result<TermSum> {
    match r {
        Regime::Case1 | Regime::Case3 => Ok(TermSum::zero()),
        Regime::Case2 => parse(CASE2_SCALAR_SLIPS),
        Regime::Case4 => parse(CASE4_SCALAR_DISCREPANCIES),
        Regime::Case3ST => scalar(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_transcription_parses() {
        for r in Regime::ALL {
            pair(r).unwrap();
        }
        for r in [Regime::Case1, Regime::Case2, Regime::Case3, Regime::Case4] {
            assert!(!scalar(r).unwrap().is_empty());
            eta_recovery(r).unwrap();
            known_discrepancies(r).unwrap();
        }
        parse(CASE1_SCALAR_RAW).unwrap();
    }

    #[test]
    fn case3st_reduces_to_case3_without_tau() {
        let (_, d) = pair(Regime::Case3ST).unwrap();
        let (_, d3) = pair(Regime::Case3).unwrap();
        assert_eq!(d.drop_param(4), d3);
    }
}
