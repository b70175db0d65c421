//! Coin specifications on the command line and in configs.

use std::str::FromStr;

use hexwalk_core::coin::{self, COIN_UNITARITY_TOL};
use hexwalk_core::{CoinField, Error, Mat3, Result, C64};

/// Literal coins further than this from unitary are rejected.
pub const LITERAL_TOL: f64 = 1e-8;

/// Parse a single coin.
///
/// Presets: `c0`, `c0-tilde`, `identity`, `swap12`, `theta:<angle>`,
/// `near-c0:<radius>:<seed>`, `random:<seed>`; otherwise a literal
/// `[[a,b,c],[d,e,f],[g,h,i]]` with entries such as `0.5`, `-i`, `0.6+0.8i`.
pub fn parse_coin(spec: &str) -> Result<Mat3> {
    let spec = spec.trim();
    let mut parts = spec.split(':');
    let head = parts.next().unwrap_or_default();
    let args: Vec<&str> = parts.collect();
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Input(format!("coin '{spec}' takes {n} argument(s)")))
        }
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Input(format!("bad number '{s}' in coin '{spec}'")));
    let int = |s: &str| s.parse::<u64>().map_err(|_| Error::Input(format!("bad seed '{s}' in coin '{spec}'")));
    match head {
        "c0" | "c0-tilde" | "identity" | "swap12" => {
            want(0)?;
            Ok(match head {
                "c0" => coin::c0(),
                "c0-tilde" => coin::c0_tilde(),
                "identity" => coin::identity(),
                _ => coin::swap12(),
            })
        }
        "theta" => {
            want(1)?;
            Ok(coin::theta(num(args[0])?))
        }
        "near-c0" => {
            want(2)?;
            coin::near_c0(num(args[0])?, int(args[1])?)
        }
        "random" => {
            want(1)?;
            Ok(coin::random_unitary(int(args[0])?))
        }
        _ if spec.starts_with('[') => parse_literal(spec),
        _ => Err(Error::Input(format!("unknown coin '{spec}'"))),
    }
}

fn parse_literal(spec: &str) -> Result<Mat3> {
    let flat: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = flat
        .strip_prefix("[[")
        .and_then(|s| s.strip_suffix("]]"))
        .ok_or_else(|| Error::Input(format!("matrix literal must look like [[..],[..],[..]], got '{spec}'")))?;
    let rows: Vec<&str> = inner.split("],[").collect();
    if rows.len() != 3 {
        return Err(Error::Input(format!("matrix literal needs 3 rows, got {}", rows.len())));
    }
    let mut m = Mat3::zeros();
    for (r, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::Input(format!("row {} has {} entries", r + 1, cells.len())));
        }
        for (c, cell) in cells.iter().enumerate() {
            m[(r, c)] = parse_entry(cell)?;
        }
    }
    coin::validated(&m, LITERAL_TOL.max(COIN_UNITARITY_TOL))
}

fn parse_entry(s: &str) -> Result<C64> {
    let fixed = match s {
        "i" | "+i" => "1i".to_string(),
        "-i" => "-1i".to_string(),
        _ => s.replace("+i", "+1i").replace("-i", "-1i"),
    };
    C64::from_str(&fixed).map_err(|_| Error::Input(format!("bad matrix entry '{s}'")))
}

/// A coin field using the same coin on every site.
pub fn coin_parse(spec: &str) -> Result<CoinField> {
    CoinField::constant(parse_coin(spec)?)
}
