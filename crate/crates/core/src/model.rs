//! Core chain data types shared by every other module.
//!
//! Monetary values are exact: an [`Amount`] is an unsigned integer count of
//! base units plus the chain's decimal precision. No floating point is used
//! anywhere on a value path.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("empty address")]
    EmptyAddress,
    #[error("address contains whitespace or control characters")]
    InvalidAddressChar,
    #[error("malformed amount {0:?}: expected digits with an optional fractional part")]
    MalformedAmount(String),
    #[error("amount {text:?} has {got} fractional digits but the chain only carries {decimals}")]
    TooPrecise { text: String, got: usize, decimals: u32 },
    #[error("amount {0:?} overflows the base-unit range")]
    AmountOverflow(String),
    #[error("decimals {0} out of range (max 30)")]
    DecimalsOutOfRange(u32),
    #[error("mismatched decimals: {0} vs {1}")]
    MismatchedDecimals(u32, u32),
    #[error("transaction {0:?}: coinbase flag requires an empty input list")]
    CoinbaseWithInputs(String),
    #[error("transaction {0:?}: non-coinbase transaction has no inputs")]
    MissingInputs(String),
    #[error("transaction {0:?} has no outputs")]
    MissingOutputs(String),
}

/// Opaque chain address. Compared and sorted bytewise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(String);

impl Address {
    pub fn new(token: impl Into<String>) -> Result<Self, ModelError> {
        let token = token.into();
        if token.is_empty() {
            return Err(ModelError::EmptyAddress);
        }
        if token.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(ModelError::InvalidAddressChar);
        }
        Ok(Address(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Address {
    fn borrow(&self) -> &str {
        &self.0
    }
}

pub const MAX_DECIMALS: u32 = 30;

/// Exact monetary value: `base_units` at a fixed decimal precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount {
    base_units: u128,
    decimals: u32,
}

impl Amount {
    pub fn from_base_units(base_units: u128, decimals: u32) -> Result<Self, ModelError> {
        if decimals > MAX_DECIMALS {
            return Err(ModelError::DecimalsOutOfRange(decimals));
        }
        Ok(Amount { base_units, decimals })
    }

    /// Parses decimal text of the shape `[0-9]+(\.[0-9]+)?`.
    ///
    /// The fractional part may not be longer than `decimals`; the scaled
    /// value must fit in the base-unit range.
    pub fn parse(text: &str, decimals: u32) -> Result<Self, ModelError> {
        if decimals > MAX_DECIMALS {
            return Err(ModelError::DecimalsOutOfRange(decimals));
        }
        let malformed = || ModelError::MalformedAmount(text.to_string());
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        if text.contains('.') && (frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit())) {
            return Err(malformed());
        }
        if frac_part.len() > decimals as usize {
            return Err(ModelError::TooPrecise {
                text: text.to_string(),
                got: frac_part.len(),
                decimals,
            });
        }
        let overflow = || ModelError::AmountOverflow(text.to_string());
        let int_units: u128 = int_part.parse().map_err(|_| overflow())?;
        let frac_units: u128 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| overflow())? };
        let frac_scale = pow10(decimals - frac_part.len() as u32);
        let base_units = int_units
            .checked_mul(pow10(decimals))
            .and_then(|v| v.checked_add(frac_units.checked_mul(frac_scale)?))
            .ok_or_else(overflow)?;
        Ok(Amount { base_units, decimals })
    }

    pub fn base_units(&self) -> u128 {
        self.base_units
    }

    pub fn decimals(&self) -> u32 {
        self.decimals
    }

    pub fn is_zero(&self) -> bool {
        self.base_units == 0
    }

    pub fn checked_add(self, other: Amount) -> Result<Amount, ModelError> {
        if self.decimals != other.decimals {
            return Err(ModelError::MismatchedDecimals(self.decimals, other.decimals));
        }
        let base_units = self
            .base_units
            .checked_add(other.base_units)
            .ok_or_else(|| ModelError::AmountOverflow(format!("{self} + {other}")))?;
        Ok(Amount { base_units, decimals: self.decimals })
    }

    pub fn checked_sub(self, other: Amount) -> Result<Amount, ModelError> {
        if self.decimals != other.decimals {
            return Err(ModelError::MismatchedDecimals(self.decimals, other.decimals));
        }
        let base_units = self
            .base_units
            .checked_sub(other.base_units)
            .ok_or_else(|| ModelError::AmountOverflow(format!("{self} - {other}")))?;
        Ok(Amount { base_units, decimals: self.decimals })
    }

    /// Number of significant fractional digits: the smallest `k` such that
    /// the value is a whole multiple of `10^(decimals - k)`. Whole-unit
    /// amounts (and zero) report 0; trailing zeros never count.
    pub fn fractional_digits(&self) -> u32 {
        if self.base_units == 0 {
            return 0;
        }
        let mut k = self.decimals;
        let mut rest = self.base_units;
        while k > 0 && rest.is_multiple_of(10) {
            rest /= 10;
            k -= 1;
        }
        k
    }
}

/// Canonical decimal rendering: no sign, no exponent, no trailing zeros,
/// a bare integer when the fractional part is zero.
impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = pow10(self.decimals);
        let int = self.base_units / scale;
        let frac = self.base_units % scale;
        if frac == 0 {
            return write!(f, "{int}");
        }
        let digits = format!("{frac:0width$}", width = self.decimals as usize);
        write!(f, "{int}.{}", digits.trim_end_matches('0'))
    }
}

pub(crate) fn pow10(exp: u32) -> u128 {
    10u128.pow(exp)
}

/// Total order over chain history: block height first, then index in block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainPosition {
    pub block: u64,
    pub index: u64,
}

impl ChainPosition {
    pub fn new(block: u64, index: u64) -> Self {
        ChainPosition { block, index }
    }
}

impl fmt::Display for ChainPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {} index {}", self.block, self.index)
    }
}

/// One UTXO-model transaction. Input and output entries pair the holding
/// address with the value moved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtxoTransaction {
    pub txid: String,
    pub position: ChainPosition,
    pub coinbase: bool,
    pub inputs: Vec<(Address, Amount)>,
    pub outputs: Vec<(Address, Amount)>,
}

impl UtxoTransaction {
    /// Enforces the structural invariants: coinbase if and only if the input
    /// list is empty, and at least one output.
    pub fn new(
        txid: impl Into<String>,
        position: ChainPosition,
        coinbase: bool,
        inputs: Vec<(Address, Amount)>,
        outputs: Vec<(Address, Amount)>,
    ) -> Result<Self, ModelError> {
        let txid = txid.into();
        if coinbase && !inputs.is_empty() {
            return Err(ModelError::CoinbaseWithInputs(txid));
        }
        if !coinbase && inputs.is_empty() {
            return Err(ModelError::MissingInputs(txid));
        }
        if outputs.is_empty() {
            return Err(ModelError::MissingOutputs(txid));
        }
        Ok(UtxoTransaction { txid, position, coinbase, inputs, outputs })
    }
}

/// One account-model transfer: a single (from, to, value) movement of an
/// asset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccountTransfer {
    pub hash: String,
    pub position: ChainPosition,
    pub from: Address,
    pub to: Address,
    pub value: Amount,
    pub asset: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amount(text: &str, decimals: u32) -> Amount {
        Amount::parse(text, decimals).unwrap()
    }

    #[test]
    fn parse_scales_into_base_units() {
        assert_eq!(amount("174.65893626", 18).base_units(), 174_658_936_260_000_000_000);
        assert_eq!(amount("0.5", 8).base_units(), 50_000_000);
        assert_eq!(amount("42", 0).base_units(), 42);
        assert_eq!(amount("0", 18).base_units(), 0);
        assert_eq!(amount("0.00042", 18).base_units(), 420_000_000_000_000);
    }

    #[test]
    fn parse_rejects_malformed_text() {
        for bad in ["", ".", "5.", ".5", "1..2", "1.2.3", "+1", "-1", "1e5", "a", "1 0", "0x10"] {
            assert!(
                matches!(Amount::parse(bad, 8), Err(ModelError::MalformedAmount(_))),
                "{bad:?} should be malformed"
            );
        }
    }

    #[test]
    fn parse_rejects_excess_precision() {
        assert_eq!(
            Amount::parse("1.234", 2),
            Err(ModelError::TooPrecise { text: "1.234".into(), got: 3, decimals: 2 })
        );
        // Trailing zeros still count toward the textual fractional length.
        assert!(matches!(Amount::parse("1.10", 1), Err(ModelError::TooPrecise { .. })));
    }

    #[test]
    fn parse_rejects_overflow_and_bad_decimals() {
        assert!(matches!(
            Amount::parse("340282366920938463463374607431768211456", 0),
            Err(ModelError::AmountOverflow(_))
        ));
        assert!(matches!(Amount::parse("999999999999999999999999", 30), Err(ModelError::AmountOverflow(_))));
        assert_eq!(Amount::parse("1", 31), Err(ModelError::DecimalsOutOfRange(31)));
    }

    #[test]
    fn subtraction_is_exact() {
        let paid_in = amount("137.8303045", 18);
        let swept_out = amount("137.8298845", 18);
        let fee = paid_in.checked_sub(swept_out).unwrap();
        assert_eq!(fee, amount("0.00042", 18));
        assert_eq!(fee.to_string(), "0.00042");
    }

    #[test]
    fn arithmetic_rejects_mixed_precision_and_overflow() {
        let a = amount("1", 8);
        let b = amount("1", 18);
        assert_eq!(a.checked_add(b), Err(ModelError::MismatchedDecimals(8, 18)));
        let max = Amount::from_base_units(u128::MAX, 0).unwrap();
        assert!(matches!(max.checked_add(amount("1", 0)), Err(ModelError::AmountOverflow(_))));
        assert!(matches!(amount("1", 0).checked_sub(amount("2", 0)), Err(ModelError::AmountOverflow(_))));
    }

    #[test]
    fn fractional_digits_counts_significant_places() {
        assert_eq!(amount("174.65893626", 18).fractional_digits(), 8);
        assert_eq!(amount("5.0", 8).fractional_digits(), 0);
        assert_eq!(amount("5", 8).fractional_digits(), 0);
        assert_eq!(amount("0.00042", 18).fractional_digits(), 5);
        assert_eq!(amount("0", 18).fractional_digits(), 0);
        assert_eq!(amount("0.1000", 8).fractional_digits(), 1);
        assert_eq!(amount("3.14159", 5).fractional_digits(), 5);
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(amount("174.65893626", 18).to_string(), "174.65893626");
        assert_eq!(amount("5.0", 8).to_string(), "5");
        assert_eq!(amount("0", 18).to_string(), "0");
        assert_eq!(amount("0.100", 8).to_string(), "0.1");
        assert_eq!(amount("0.00000001", 8).to_string(), "0.00000001");
        assert_eq!(amount("7", 0).to_string(), "7");
    }

    #[test]
    fn positions_order_by_block_then_index() {
        let a = ChainPosition::new(100, 5);
        let b = ChainPosition::new(100, 6);
        let c = ChainPosition::new(101, 0);
        assert!(a < b && b < c);
        assert_eq!(a, ChainPosition::new(100, 5));
    }

    #[test]
    fn address_rejects_empty_and_unprintable() {
        assert_eq!(Address::new(""), Err(ModelError::EmptyAddress));
        assert_eq!(Address::new("a b"), Err(ModelError::InvalidAddressChar));
        assert_eq!(Address::new("a\tb"), Err(ModelError::InvalidAddressChar));
        assert_eq!(Address::new("a\u{7}b"), Err(ModelError::InvalidAddressChar));
        assert!(Address::new("0xAbC123").is_ok());
    }

    #[test]
    fn addresses_sort_bytewise() {
        let mut addrs: Vec<Address> =
            ["b", "a", "B", "aa", "0x2", "0x10"].iter().map(|s| Address::new(*s).unwrap()).collect();
        addrs.sort();
        let sorted: Vec<&str> = addrs.iter().map(|a| a.as_str()).collect();
        assert_eq!(sorted, vec!["0x10", "0x2", "B", "a", "aa", "b"]);
    }

    #[test]
    fn transaction_invariants_are_enforced() {
        let addr = |s: &str| Address::new(s).unwrap();
        let one = amount("1", 8);
        let pos = ChainPosition::new(0, 0);
        let err = UtxoTransaction::new("t1", pos, true, vec![(addr("a"), one)], vec![(addr("b"), one)]);
        assert_eq!(err.unwrap_err(), ModelError::CoinbaseWithInputs("t1".into()));
        let err = UtxoTransaction::new("t2", pos, false, vec![], vec![(addr("b"), one)]);
        assert_eq!(err.unwrap_err(), ModelError::MissingInputs("t2".into()));
        let err = UtxoTransaction::new("t3", pos, false, vec![(addr("a"), one)], vec![]);
        assert_eq!(err.unwrap_err(), ModelError::MissingOutputs("t3".into()));
        assert!(UtxoTransaction::new("t4", pos, true, vec![], vec![(addr("b"), one)]).is_ok());
    }
}
