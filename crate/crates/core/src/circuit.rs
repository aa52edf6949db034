//! Semiprime factorization benchmarks: a schoolbook array multiplier over two
//! unknown factors, encoded gate by gate into CNF with the product bits fixed
//! by unit clauses.
//!
//! Variable layout (1-indexed, LSB first everywhere): factor `a` occupies
//! `1..=bits_a`, factor `b` the next `bits_b` indices, and every gate output
//! gets a fresh index in construction order. Product bit `k` is
//! `output_bits[k]`.

use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, Cnf, Literal};
use crate::error::CircuitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buffer,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not | GateKind::Buffer => 1,
            _ => 2,
        }
    }

    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            GateKind::And => inputs[0] && inputs[1],
            GateKind::Or => inputs[0] || inputs[1],
            GateKind::Nand => !(inputs[0] && inputs[1]),
            GateKind::Nor => !(inputs[0] || inputs[1]),
            GateKind::Xor => inputs[0] ^ inputs[1],
            GateKind::Xnor => !(inputs[0] ^ inputs[1]),
            GateKind::Not => !inputs[0],
            GateKind::Buffer => inputs[0],
        }
    }

    /// Whether the three-clause implication encoding exists for this gate.
    pub fn has_option2(self) -> bool {
        matches!(
            self,
            GateKind::And | GateKind::Or | GateKind::Nand | GateKind::Nor
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<u32>,
    pub output: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingOption {
    /// One 3-literal clause per excluded truth-table row.
    #[default]
    Option1,
    /// Implication form; AND/OR/NAND/NOR only.
    Option2,
}

/// How a full adder is decomposed into 2-input gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FullAdderStyle {
    /// `s = (x^y)^c`, `cout = xy | c(x^y)`: 2 XOR, 2 AND, 1 OR.
    Propagate,
    /// `s = xnor(xnor(x,y),c)`, `cout = xy | c(x|y)`: 2 XNOR, 2 AND, 2 OR.
    #[default]
    XnorMajority,
    /// `s = (x^y)^c`, `cout = (xy | xc) | yc`: 2 XOR, 3 AND, 2 OR.
    SumOfProducts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateNetlist {
    pub num_vars: u32,
    pub gates: Vec<Gate>,
    pub input_bits_a: Vec<u32>,
    pub input_bits_b: Vec<u32>,
    pub output_bits: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub and: usize,
    pub or: usize,
    pub nand: usize,
    pub nor: usize,
    pub xor: usize,
    pub xnor: usize,
    pub not: usize,
    pub buffer: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.and + self.or + self.nand + self.nor + self.xor + self.xnor + self.not + self.buffer
    }
}

impl GateNetlist {
    pub fn gate_counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            *match g.kind {
                GateKind::And => &mut c.and,
                GateKind::Or => &mut c.or,
                GateKind::Nand => &mut c.nand,
                GateKind::Nor => &mut c.nor,
                GateKind::Xor => &mut c.xor,
                GateKind::Xnor => &mut c.xnor,
                GateKind::Not => &mut c.not,
                GateKind::Buffer => &mut c.buffer,
            } += 1;
        }
        c
    }

    /// Simulates the circuit; returns values indexed by `var - 1`.
    pub fn simulate(&self, a: u64, b: u64) -> Vec<bool> {
        let mut values = vec![false; self.num_vars as usize];
        for (i, &v) in self.input_bits_a.iter().enumerate() {
            values[v as usize - 1] = a >> i & 1 == 1;
        }
        for (i, &v) in self.input_bits_b.iter().enumerate() {
            values[v as usize - 1] = b >> i & 1 == 1;
        }
        for g in &self.gates {
            let ins: Vec<bool> = g.inputs.iter().map(|&v| values[v as usize - 1]).collect();
            values[g.output as usize - 1] = g.kind.eval(&ins);
        }
        values
    }

    pub fn product_of(&self, values: &[bool]) -> u64 {
        bits_to_u64(&self.output_bits, values)
    }

    /// Reads the two factors out of a full assignment.
    pub fn factors_of(&self, values: &[bool]) -> (u64, u64) {
        (
            bits_to_u64(&self.input_bits_a, values),
            bits_to_u64(&self.input_bits_b, values),
        )
    }
}

fn bits_to_u64(bits: &[u32], values: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .filter(|(_, &v)| values[v as usize - 1])
        .fold(0, |acc, (i, _)| acc | 1 << i)
}

struct NetlistBuilder {
    next_var: u32,
    gates: Vec<Gate>,
    adder: FullAdderStyle,
}

impl NetlistBuilder {
    fn gate(&mut self, kind: GateKind, inputs: &[u32]) -> u32 {
        let output = self.next_var;
        self.next_var += 1;
        self.gates.push(Gate {
            kind,
            inputs: inputs.to_vec(),
            output,
        });
        output
    }

    fn half_adder(&mut self, x: u32, y: u32) -> (u32, u32) {
        let s = self.gate(GateKind::Xor, &[x, y]);
        let c = self.gate(GateKind::And, &[x, y]);
        (s, c)
    }

    fn full_adder(&mut self, x: u32, y: u32, cin: u32) -> (u32, u32) {
        match self.adder {
            FullAdderStyle::Propagate => {
                let t = self.gate(GateKind::Xor, &[x, y]);
                let s = self.gate(GateKind::Xor, &[t, cin]);
                let g = self.gate(GateKind::And, &[x, y]);
                let p = self.gate(GateKind::And, &[t, cin]);
                let c = self.gate(GateKind::Or, &[g, p]);
                (s, c)
            }
            FullAdderStyle::XnorMajority => {
                let e = self.gate(GateKind::Xnor, &[x, y]);
                let s = self.gate(GateKind::Xnor, &[e, cin]);
                let g = self.gate(GateKind::And, &[x, y]);
                let o = self.gate(GateKind::Or, &[x, y]);
                let p = self.gate(GateKind::And, &[o, cin]);
                let c = self.gate(GateKind::Or, &[g, p]);
                (s, c)
            }
            FullAdderStyle::SumOfProducts => {
                let t = self.gate(GateKind::Xor, &[x, y]);
                let s = self.gate(GateKind::Xor, &[t, cin]);
                let g1 = self.gate(GateKind::And, &[x, y]);
                let g2 = self.gate(GateKind::And, &[x, cin]);
                let g3 = self.gate(GateKind::And, &[y, cin]);
                let o = self.gate(GateKind::Or, &[g1, g2]);
                let c = self.gate(GateKind::Or, &[o, g3]);
                (s, c)
            }
        }
    }
}

/// Array multiplier with the default full-adder style.
pub fn build_multiplier(bits_a: usize, bits_b: usize) -> Result<GateNetlist, CircuitError> {
    build_multiplier_with(bits_a, bits_b, FullAdderStyle::default())
}

/// Schoolbook array multiplier: `bits_a * bits_b` AND partial products, then
/// one ripple-carry row per bit of `b` after the first.
pub fn build_multiplier_with(
    bits_a: usize,
    bits_b: usize,
    adder: FullAdderStyle,
) -> Result<GateNetlist, CircuitError> {
    if bits_a < 2 || bits_b < 2 {
        return Err(CircuitError::FactorTooNarrow(bits_a, bits_b));
    }
    let input_bits_a: Vec<u32> = (1..=bits_a as u32).collect();
    let input_bits_b: Vec<u32> = (bits_a as u32 + 1..=(bits_a + bits_b) as u32).collect();
    let mut nb = NetlistBuilder {
        next_var: (bits_a + bits_b) as u32 + 1,
        gates: Vec::new(),
        adder,
    };

    // pp[j][i] = a_i AND b_j
    let pp: Vec<Vec<u32>> = input_bits_b
        .iter()
        .map(|&bj| {
            input_bits_a
                .iter()
                .map(|&ai| nb.gate(GateKind::And, &[ai, bj]))
                .collect()
        })
        .collect();

    let mut outputs = Vec::with_capacity(bits_a + bits_b);
    // acc holds the running sum starting at bit position j.
    let mut acc: Vec<u32> = pp[0].clone();
    for row in pp.iter().skip(1) {
        outputs.push(acc[0]);
        let upper = &acc[1..];
        let mut next = Vec::with_capacity(bits_a + 1);
        let mut carry: Option<u32> = None;
        for (k, &r) in row.iter().enumerate() {
            let (s, c) = match (upper.get(k).copied(), carry) {
                (Some(u), Some(c)) => nb.full_adder(u, r, c),
                (Some(u), None) => nb.half_adder(u, r),
                (None, Some(c)) => nb.half_adder(r, c),
                (None, None) => {
                    next.push(r);
                    continue;
                }
            };
            next.push(s);
            carry = Some(c);
        }
        if let Some(c) = carry {
            next.push(c);
        }
        acc = next;
    }
    outputs.extend(acc);
    debug_assert_eq!(outputs.len(), bits_a + bits_b);

    Ok(GateNetlist {
        num_vars: nb.next_var - 1,
        gates: nb.gates,
        input_bits_a,
        input_bits_b,
        output_bits: outputs,
    })
}

/// Complete encoding: one clause per truth-table row the gate forbids.
/// Rows are enumerated with the first input as the most significant bit.
pub fn option1_clauses(kind: GateKind, inputs: &[u32], output: u32) -> Vec<Clause> {
    let arity = kind.arity();
    let mut clauses = Vec::with_capacity(1 << arity);
    for row in 0..1u32 << arity {
        let ins: Vec<bool> = (0..arity)
            .map(|i| row >> (arity - 1 - i) & 1 == 1)
            .collect();
        let wrong = !kind.eval(&ins);
        let mut lits: Vec<Literal> = inputs
            .iter()
            .zip(&ins)
            .map(|(&v, &val)| Literal::new(v, !val))
            .collect();
        lits.push(Literal::new(output, !wrong));
        clauses.push(Clause::new(lits));
    }
    clauses
}

/// Implication encoding for AND-type gates, written as `o ↔ (l1 ∧ l2)`:
/// `(o ∨ ¬l1 ∨ ¬l2)(l1 ∨ ¬o)(l2 ∨ ¬o)`. Returns `None` for XOR-type and
/// single-input gates.
pub fn option2_clauses(kind: GateKind, inputs: &[u32], output: u32) -> Option<Vec<Clause>> {
    let (o, l1, l2) = match kind {
        GateKind::And => (
            Literal::pos(output),
            Literal::pos(inputs[0]),
            Literal::pos(inputs[1]),
        ),
        GateKind::Or => (
            Literal::neg(output),
            Literal::neg(inputs[0]),
            Literal::neg(inputs[1]),
        ),
        GateKind::Nand => (
            Literal::neg(output),
            Literal::pos(inputs[0]),
            Literal::pos(inputs[1]),
        ),
        GateKind::Nor => (
            Literal::pos(output),
            Literal::neg(inputs[0]),
            Literal::neg(inputs[1]),
        ),
        _ => return None,
    };
    Some(and_type_option2(o, l1, l2))
}

pub(crate) fn and_type_option2(o: Literal, l1: Literal, l2: Literal) -> Vec<Clause> {
    vec![
        Clause::new(vec![o, !l1, !l2]),
        Clause::new(vec![l1, !o]),
        Clause::new(vec![l2, !o]),
    ]
}

/// Encodes the netlist and pins the product bits with unit clauses
/// (LSB first, after all gate clauses). XOR/XNOR/NOT/BUFFER gates always use
/// the complete encoding, even under `Option2`.
pub fn encode_netlist(
    netlist: &GateNetlist,
    opt: EncodingOption,
    product: u64,
) -> Result<Cnf, CircuitError> {
    let width = netlist.output_bits.len();
    if width < 64 && product >> width != 0 {
        return Err(CircuitError::ProductTooWide {
            product,
            bits: width,
        });
    }
    let mut clauses = Vec::new();
    let mut fallback = 0usize;
    for g in &netlist.gates {
        let encoded = match opt {
            EncodingOption::Option1 => None,
            EncodingOption::Option2 => option2_clauses(g.kind, &g.inputs, g.output),
        };
        match encoded {
            Some(cs) => clauses.extend(cs),
            None => {
                if opt == EncodingOption::Option2 && g.kind.arity() == 2 {
                    fallback += 1;
                }
                clauses.extend(option1_clauses(g.kind, &g.inputs, g.output));
            }
        }
    }
    for (k, &v) in netlist.output_bits.iter().enumerate() {
        clauses.push(Clause::unit(Literal::new(v, product >> k & 1 == 1)));
    }
    if fallback > 0 {
        log::info!("{fallback} XOR/XNOR gate(s) have no Option-2 form; kept Option-1");
    }

    let mut cnf = Cnf::new(netlist.num_vars, clauses).expect("netlist vars in range");
    let counts = netlist.gate_counts();
    cnf.provenance = format!(
        "semiprime {product} ({}x{} multiplier, {:?})",
        netlist.input_bits_a.len(),
        netlist.input_bits_b.len(),
        opt
    );
    cnf.comments = vec![
        "bit order: LSB first".to_string(),
        format!("factor_a vars: {}", join(&netlist.input_bits_a)),
        format!("factor_b vars: {}", join(&netlist.input_bits_b)),
        format!("product vars: {}", join(&netlist.output_bits)),
        format!(
            "gates: and {} or {} xor {} xnor {} total {}",
            counts.and,
            counts.or,
            counts.xor,
            counts.xnor,
            counts.total()
        ),
    ];
    if fallback > 0 {
        cnf.comments
            .push(format!("note: {fallback} XOR/XNOR gates kept in Option-1 form"));
    }
    Ok(cnf)
}

fn join(vars: &[u32]) -> String {
    vars.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

/// Factor widths used for a `bit_width`-bit product: the narrower factor
/// gets `floor(bit_width / 2)` bits.
pub fn factor_widths(bit_width: usize) -> (usize, usize) {
    (bit_width / 2, bit_width - bit_width / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiprimeEntry {
    pub semiprime: u64,
    pub p: u64,
    pub q: u64,
    pub bits: usize,
}

/// All products of two odd primes whose binary widths are exactly the factor
/// widths for `bit_width` (so both most significant bits are 1). When both
/// widths match, each unordered pair appears once with `p <= q`.
pub fn semiprime_catalog(bit_width: usize) -> Result<Vec<SemiprimeEntry>, CircuitError> {
    if !(4..=16).contains(&bit_width) {
        return Err(CircuitError::UnsupportedWidth(bit_width));
    }
    let (wa, wb) = factor_widths(bit_width);
    let primes_of_width = |w: usize| -> Vec<u64> {
        (1u64 << (w - 1)..1u64 << w)
            .filter(|&x| x > 2 && is_prime(x))
            .collect()
    };
    let pa = primes_of_width(wa);
    let pb = primes_of_width(wb);
    let mut out = Vec::new();
    for &p in &pa {
        for &q in &pb {
            if wa == wb && p > q {
                continue;
            }
            out.push(SemiprimeEntry {
                semiprime: p * q,
                p,
                q,
                bits: bit_width,
            });
        }
    }
    out.sort_by_key(|e| e.semiprime);
    Ok(out)
}

/// Builds the default benchmark CNF for one catalog entry.
pub fn semiprime_instance(entry: &SemiprimeEntry, opt: EncodingOption) -> Cnf {
    let (wa, wb) = factor_widths(entry.bits);
    let netlist = build_multiplier(wa, wb).expect("catalog widths are at least 2");
    encode_netlist(&netlist, opt, entry.semiprime).expect("catalog product fits")
}

fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::brute_force_solutions;

    #[test]
    fn or_gate_option1_matches_truth_table_exclusions() {
        // c = a ∨ b with a=1, b=2, c=3
        let got = option1_clauses(GateKind::Or, &[1, 2], 3);
        let want: Vec<Clause> = [[1, 2, -3], [1, -2, 3], [-1, 2, 3], [-1, -2, 3]]
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn or_gate_option2_is_implication_form() {
        let got = option2_clauses(GateKind::Or, &[1, 2], 3).unwrap();
        let want: Vec<Clause> = [&[-3, 1, 2][..], &[-1, 3], &[-2, 3]]
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect();
        assert_eq!(got, want);
        assert!(option2_clauses(GateKind::Xor, &[1, 2], 3).is_none());
    }

    #[test]
    fn every_gate_encoding_has_its_truth_table_as_models() {
        for kind in [
            GateKind::And,
            GateKind::Or,
            GateKind::Nand,
            GateKind::Nor,
            GateKind::Xor,
            GateKind::Xnor,
        ] {
            let mut want: Vec<u64> = (0..4u64)
                .map(|row| {
                    let a = row & 1 == 1;
                    let b = row >> 1 & 1 == 1;
                    let c = kind.eval(&[a, b]);
                    row | (c as u64) << 2
                })
                .collect();
            want.sort_unstable();
            let o1 = Cnf::new(3, option1_clauses(kind, &[1, 2], 3)).unwrap();
            assert_eq!(brute_force_solutions(&o1, 26).unwrap().masks, want, "{kind:?}");
            if let Some(cs) = option2_clauses(kind, &[1, 2], 3) {
                let o2 = Cnf::new(3, cs).unwrap();
                assert_eq!(brute_force_solutions(&o2, 26).unwrap().masks, want, "{kind:?}");
            }
        }
    }

    #[test]
    fn two_by_two_multiplier_simulates_products() {
        let net = build_multiplier(2, 2).unwrap();
        let values = net.simulate(2, 3);
        assert_eq!(net.product_of(&values), 6);
        let bits: Vec<bool> = net.output_bits.iter().map(|&v| values[v as usize - 1]).collect();
        assert_eq!(bits, vec![false, true, true, false]);
    }

    #[test]
    fn multipliers_compute_every_product() {
        for style in [
            FullAdderStyle::Propagate,
            FullAdderStyle::XnorMajority,
            FullAdderStyle::SumOfProducts,
        ] {
            for (wa, wb) in [(2, 2), (2, 3), (3, 4), (4, 4)] {
                let net = build_multiplier_with(wa, wb, style).unwrap();
                assert_eq!(net.output_bits.len(), wa + wb);
                for a in 0..1u64 << wa {
                    for b in 0..1u64 << wb {
                        assert_eq!(net.product_of(&net.simulate(a, b)), a * b);
                    }
                }
            }
        }
    }

    #[test]
    fn netlist_is_single_assignment() {
        let net = build_multiplier(5, 6).unwrap();
        let mut outs: Vec<u32> = net.gates.iter().map(|g| g.output).collect();
        outs.sort_unstable();
        outs.dedup();
        assert_eq!(outs.len(), net.gates.len());
        assert_eq!(net.num_vars as usize, 11 + net.gates.len());
    }

    #[test]
    fn encoded_units_follow_product_bits_lsb_first() {
        let net = build_multiplier(2, 2).unwrap();
        let cnf = encode_netlist(&net, EncodingOption::Option1, 9).unwrap();
        let units: Vec<Literal> = cnf
            .clauses()
            .iter()
            .filter(|c| c.is_unit())
            .map(|c| c.lits()[0])
            .collect();
        let want: Vec<Literal> = net
            .output_bits
            .iter()
            .enumerate()
            .map(|(k, &v)| Literal::new(v, 9 >> k & 1 == 1))
            .collect();
        assert_eq!(units, want);
        assert!(encode_netlist(&net, EncodingOption::Option1, 16).is_err());
    }

    #[test]
    fn catalog_entries_multiply_out() {
        for bits in 4..=11 {
            for e in semiprime_catalog(bits).unwrap() {
                assert_eq!(e.p * e.q, e.semiprime);
                assert!(is_prime(e.p) && is_prime(e.q));
            }
        }
        let four = semiprime_catalog(4).unwrap();
        assert!(four.iter().any(|e| e.semiprime == 9 && e.p == 3 && e.q == 3));
        assert!(semiprime_catalog(3).is_err());
    }

    #[test]
    fn option2_falls_back_for_xor_gates() {
        let net = build_multiplier(2, 2).unwrap();
        let o1 = encode_netlist(&net, EncodingOption::Option1, 9).unwrap();
        let o2 = encode_netlist(&net, EncodingOption::Option2, 9).unwrap();
        let counts = net.gate_counts();
        let and_or = counts.and + counts.or;
        assert_eq!(o1.num_clauses() - o2.num_clauses(), and_or);
        assert!(o2.comments.iter().any(|c| c.contains("Option-1")));
    }
}
