use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BellFunctional, SiteCount};

/// Choice of setting `A` or `B` at every site, packed as a bit mask where
/// bit `k` set means `B` at site `k`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SettingWord {
    sites: u32,
    mask: u32,
}

impl SettingWord {
    pub fn new(sites: u32, mask: u32) -> Result<Self> {
        if sites == 0 || sites > 31 || mask >> sites != 0 {
            return Err(Error::Domain(format!(
                "mask {mask:#b} is not a {sites}-site word"
            )));
        }
        Ok(SettingWord { sites, mask })
    }

    /// All `2^n` words in mask order.
    pub fn all(sites: u32) -> impl Iterator<Item = SettingWord> {
        (0..1u32 << sites).map(move |mask| SettingWord { sites, mask })
    }

    pub fn sites(&self) -> u32 {
        self.sites
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn is_b(&self, site: u32) -> bool {
        self.mask >> site & 1 == 1
    }

    pub fn b_count(&self) -> u32 {
        self.mask.count_ones()
    }
}

impl fmt::Display for SettingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.sites {
            f.write_str(if self.is_b(k) { "B" } else { "A" })?;
        }
        Ok(())
    }
}

impl FromStr for SettingWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut mask = 0u32;
        for (k, c) in s.chars().enumerate() {
            match c {
                'A' | 'a' => {}
                'B' | 'b' => mask |= 1 << k,
                _ => return Err(Error::Domain(format!("invalid setting word '{s}'"))),
            }
        }
        SettingWord::new(s.chars().count() as u32, mask)
    }
}

/// `coefficient · ⟨∏_k X_k⟩` with `X_k` the setting chosen by `word`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrelatorTerm {
    pub word: SettingWord,
    pub coefficient: i32,
}

impl fmt::Display for CorrelatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.coefficient < 0 { '-' } else { '+' };
        write!(f, "{sign}")?;
        if self.coefficient.abs() != 1 {
            write!(f, "{}", self.coefficient.abs())?;
        }
        for k in 0..self.word.sites {
            let c = if self.word.is_b(k) { 'B' } else { 'A' };
            write!(f, "{c}{}", k + 1)?;
        }
        Ok(())
    }
}

/// Coefficients of every word in `∏_k (A_k + i B_k) = Σ_w (re_w + i im_w) X_w`.
///
/// A word with `b` B-factors carries `i^b`: even `b` contributes
/// `(-1)^(b/2)` to the real part, odd `b` contributes `(-1)^((b-1)/2)` to
/// the imaginary part.
pub fn complex_product_terms(sites: u32) -> Vec<(SettingWord, i32, i32)> {
    SettingWord::all(sites)
        .map(|w| {
            let b = w.b_count();
            let sign = if (b / 2) % 2 == 0 { 1 } else { -1 };
            if b % 2 == 0 {
                (w, sign, 0)
            } else {
                (w, 0, sign)
            }
        })
        .collect()
}

/// Signed full-correlator expansion of `f`, zero terms dropped.
pub fn expand_functional(n: SiteCount, f: &BellFunctional) -> Result<Vec<CorrelatorTerm>> {
    f.check_sites(n)?;
    let (cr, ci) = f.weights();
    Ok(complex_product_terms(n.get())
        .into_iter()
        .map(|(word, re, im)| CorrelatorTerm {
            word,
            coefficient: cr as i32 * re + ci as i32 * im,
        })
        .filter(|t| t.coefficient != 0)
        .collect())
}

pub fn format_terms(terms: &[CorrelatorTerm]) -> String {
    terms
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use num_complex::Complex;

    fn n(k: u32) -> SiteCount {
        SiteCount::new(k).unwrap()
    }

    /// Expands `∏(A_k + i B_k)` by repeated polynomial multiplication over
    /// complex integer coefficients.
    fn brute_product(sites: u32) -> BTreeMap<u32, Complex<i32>> {
        let mut poly: BTreeMap<u32, Complex<i32>> = BTreeMap::from([(0, Complex::new(1, 0))]);
        for k in 0..sites {
            let mut next = BTreeMap::new();
            for (mask, c) in poly {
                *next.entry(mask).or_insert(Complex::new(0, 0)) += c;
                *next.entry(mask | 1 << k).or_insert(Complex::new(0, 0)) += c * Complex::new(0, 1);
            }
            poly = next;
        }
        poly
    }

    #[test]
    fn parity_rule_matches_polynomial_product() {
        for sites in 1..=8 {
            let brute = brute_product(sites);
            for (w, re, im) in complex_product_terms(sites) {
                assert_eq!(brute[&w.mask()], Complex::new(re, im));
            }
        }
    }

    #[test]
    fn single_site_real_part() {
        let terms: Vec<_> = complex_product_terms(1)
            .into_iter()
            .filter(|t| t.1 != 0)
            .collect();
        assert_eq!(terms.len(), 1);
        assert_eq!((terms[0].0.to_string(), terms[0].1), ("A".to_string(), 1));
    }

    #[test]
    fn chsh_expansion() {
        let terms = expand_functional(n(2), &BellFunctional::chsh()).unwrap();
        let mut got: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
        got.sort();
        let mut want = vec!["+A1A2", "-B1B2", "+A1B2", "+B1A2"];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn mermin_three_sites() {
        let terms = expand_functional(n(3), &BellFunctional::mermin()).unwrap();
        let mut got: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
        got.sort();
        let mut want = vec!["+A1A2A3", "-A1B2B3", "-B1A2B3", "-B1B2A3"];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn ardehali_keeps_every_word() {
        for k in 2..=8 {
            assert_eq!(
                expand_functional(n(k), &BellFunctional::ardehali())
                    .unwrap()
                    .len(),
                1 << k
            );
            assert_eq!(
                expand_functional(n(k), &BellFunctional::mermin())
                    .unwrap()
                    .len(),
                1 << (k - 1)
            );
        }
    }

    #[test]
    fn word_parsing() {
        let w: SettingWord = "ABBA".parse().unwrap();
        assert_eq!(w.mask(), 0b0110);
        assert_eq!(w.to_string(), "ABBA");
        assert!("ABC".parse::<SettingWord>().is_err());
    }
}
