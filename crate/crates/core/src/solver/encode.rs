use std::collections::BTreeSet;

use thiserror::Error;

use super::formula::{Formula, Sort, Term, Var};
use crate::syntax::{BinOp, Expr, Ident, LabelSet, Pattern, TypeExpr};

#[derive(Clone, Debug, Error, PartialEq)]
#[error("clause has no symbolic encoding: {0}")]
pub struct Unsupported(pub String);

/// Bit positions for every record label in a program, in sorted order with
/// the first label in the least significant bit. A record's declared label
/// set is then a bitvector of this width.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabelIndex {
    labels: Vec<Ident>,
}

impl LabelIndex {
    pub fn new<I: IntoIterator<Item = Ident>>(labels: I) -> Self {
        let set: BTreeSet<Ident> = labels.into_iter().collect();
        LabelIndex {
            labels: set.into_iter().collect(),
        }
    }

    /// Collects labels from record literals, projections, record patterns,
    /// retags and record types.
    pub fn of_program(e: &Expr) -> Self {
        let mut labels = Vec::new();
        e.walk(&mut |e| match e {
            Expr::Record(fs) => labels.extend(fs.iter().map(|(l, _)| l.clone())),
            Expr::Proj(_, l) => labels.push(l.clone()),
            Expr::Test(_, Pattern::Record(ls)) | Expr::Retag(_, ls) => labels.extend(ls.iter().cloned()),
            Expr::Match(_, arms) => {
                for (p, _) in arms {
                    if let Pattern::Record(ls) = p {
                        labels.extend(ls.iter().cloned());
                    }
                }
            }
            Expr::Type(t) => collect_type_labels(t, &mut labels),
            Expr::Decl(d) => {
                collect_type_labels(&d.ret, &mut labels);
                for (_, t) in &d.params {
                    collect_type_labels(t, &mut labels);
                }
            }
            _ => {}
        });
        Self::new(labels)
    }

    pub fn width(&self) -> u32 {
        self.labels.len().max(1) as u32
    }

    pub fn position(&self, label: &str) -> Option<u32> {
        self.labels
            .binary_search_by(|l| (**l).cmp(label))
            .ok()
            .map(|i| i as u32)
    }

    pub fn bits(&self, labels: &LabelSet) -> Result<u64, Unsupported> {
        if self.labels.len() > 64 {
            return Err(Unsupported(format!("{} labels exceed 64 bits", self.labels.len())));
        }
        let mut bits = 0u64;
        for l in labels.iter() {
            let i = self
                .position(l)
                .ok_or_else(|| Unsupported(format!("label {l} outside the program")))?;
            bits |= 1 << i;
        }
        Ok(bits)
    }

    pub fn term(&self, labels: &LabelSet) -> Result<Term, Unsupported> {
        Ok(Term::Bits {
            value: self.bits(labels)?,
            width: self.width(),
        })
    }

    /// `r ~ {l..}` holds when every pattern bit is set: `p = r AND p`.
    pub fn record_test(&self, record: Term, pattern: &LabelSet) -> Result<Term, Unsupported> {
        let p = self.term(pattern)?;
        Ok(Term::eq(p.clone(), Term::bit_and(record, p)))
    }

    /// Exact label-set equality `r = p`, for strict matching.
    pub fn record_test_strict(&self, record: Term, pattern: &LabelSet) -> Result<Term, Unsupported> {
        Ok(Term::eq(record, self.term(pattern)?))
    }
}

fn collect_type_labels(t: &TypeExpr, out: &mut Vec<Ident>) {
    match t {
        TypeExpr::Record(fs) => {
            for (l, t) in fs {
                out.push(l.clone());
                collect_type_labels(t, out);
            }
        }
        TypeExpr::Arrow(a, b) | TypeExpr::DepArrow(_, a, b) => {
            collect_type_labels(a, out);
            collect_type_labels(b, out);
        }
        TypeExpr::Refine(a, _) | TypeExpr::Forall(_, a) | TypeExpr::Mu(_, a) | TypeExpr::List(a) => {
            collect_type_labels(a, out)
        }
        TypeExpr::Variant(cs) => cs.iter().for_each(|(_, t)| collect_type_labels(t, out)),
        TypeExpr::Intersect(ts) => ts.iter().for_each(|t| collect_type_labels(t, out)),
        _ => {}
    }
}

/// Constructor tags as small integers, so a variant test on a symbolic tag
/// is an integer equality.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CtorIndex {
    ctors: Vec<Ident>,
}

impl CtorIndex {
    pub fn new<I: IntoIterator<Item = Ident>>(ctors: I) -> Self {
        let set: BTreeSet<Ident> = ctors.into_iter().collect();
        CtorIndex {
            ctors: set.into_iter().collect(),
        }
    }

    pub fn tag(&self, ctor: &str) -> Option<i64> {
        self.ctors.binary_search_by(|c| (**c).cmp(ctor)).ok().map(|i| i as i64)
    }

    pub fn len(&self) -> usize {
        self.ctors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ctors.is_empty()
    }
}

/// Formulas defining `target` as the value of one normalized clause, given
/// terms for its atomic operands in evaluation order: both operands of a
/// binary operator, the scrutinee of a test, the fields of a record, the
/// payload of a variant. Record operands are label-set bitvectors and
/// variant operands are constructor tags.
pub fn encode_clause(
    target: &Var,
    clause: &Expr,
    operands: &[Term],
    labels: &LabelIndex,
    ctors: &CtorIndex,
) -> Result<Vec<Formula>, Unsupported> {
    let arg = |i: usize| {
        operands
            .get(i)
            .cloned()
            .ok_or_else(|| Unsupported(format!("missing operand {i}")))
    };
    let def = |t: Term| Ok(vec![Formula::Def(target.clone(), t)]);
    match clause {
        Expr::Int(n) => def(Term::Int(*n)),
        Expr::Bool(b) => def(Term::Bool(*b)),
        Expr::Var(_) => def(arg(0)?),
        Expr::Bin(op, ..) => {
            let (a, b) = (arg(0)?, arg(1)?);
            def(match op {
                BinOp::Add => Term::add(a, b),
                BinOp::Sub => Term::sub(a, b),
                BinOp::Lt => Term::lt(a, b),
                BinOp::Le => Term::le(a, b),
                BinOp::Gt => Term::gt(a, b),
                BinOp::Ge => Term::ge(a, b),
                BinOp::Eq => Term::eq(a, b),
                BinOp::Ne => Term::not(Term::eq(a, b)),
                BinOp::And => Term::and(a, b),
                BinOp::Or => Term::or(a, b),
                BinOp::Xor => Term::xor(a, b),
            })
        }
        Expr::Not(_) => def(Term::not(arg(0)?)),
        Expr::Test(_, p) => {
            let a = arg(0)?;
            let sort = a.sort();
            def(match p {
                Pattern::Any | Pattern::Var(_) => Term::Bool(true),
                Pattern::Int => Term::Bool(sort == Sort::Int),
                Pattern::Bool => Term::Bool(sort == Sort::Bool),
                Pattern::Fun => Term::Bool(sort == Sort::Fun),
                Pattern::Record(ls) => match sort {
                    Sort::Bits(_) => labels.record_test(a, ls)?,
                    _ => Term::Bool(false),
                },
                Pattern::Variant(c, _) => match sort {
                    Sort::Int => match ctors.tag(c) {
                        Some(tag) => Term::eq(a, Term::Int(tag)),
                        None => Term::Bool(false),
                    },
                    _ => Term::Bool(false),
                },
                Pattern::Nil | Pattern::Cons(..) => return Err(Unsupported("list tests".into())),
            })
        }
        Expr::Record(fs) => {
            let ls = LabelSet::new(fs.iter().map(|(l, _)| l.clone()));
            def(labels.term(&ls)?)
        }
        Expr::Retag(_, ls) => def(labels.term(ls)?),
        Expr::Variant(c, _) => match ctors.tag(c) {
            Some(tag) => def(Term::Int(tag)),
            None => Err(Unsupported(format!("constructor {c} outside the program"))),
        },
        other => Err(Unsupported(format!("{other:?}").chars().take(40).collect())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::formula::Val;
    use crate::syntax::{ident, ClauseKey};

    #[test]
    fn record_labels_encode_low_bit_first() {
        let idx = LabelIndex::new(["a", "b", "c"].map(ident));
        assert_eq!(idx.bits(&LabelSet::from_strs(&["a", "c"])).unwrap(), 0b101);
        assert_eq!(idx.bits(&LabelSet::from_strs(&["a"])).unwrap(), 0b001);
        let r = Term::Bits { value: 0b101, width: 3 };
        let no_env = |_: &Var| None;
        let test = idx.record_test(r.clone(), &LabelSet::from_strs(&["a"])).unwrap();
        assert_eq!(test.eval(&no_env), Some(Val::Bool(true)));
        let strict = idx.record_test_strict(r.clone(), &LabelSet::from_strs(&["a"])).unwrap();
        assert_eq!(strict.eval(&no_env), Some(Val::Bool(false)));
        let miss = idx.record_test(r, &LabelSet::from_strs(&["b"])).unwrap();
        assert_eq!(miss.eval(&no_env), Some(Val::Bool(false)));
    }

    #[test]
    fn binary_clause_becomes_a_definition() {
        let key = |s: &str| ClauseKey::new(&ident(s), 0);
        let x = Var::new(key("x"), Sort::Int);
        let t = Var::new(key("t"), Sort::Bool);
        let clause = Expr::bin(BinOp::Lt, Expr::var("x"), Expr::Int(3));
        let fs = encode_clause(
            &t,
            &clause,
            &[Term::var(&x), Term::Int(3)],
            &LabelIndex::default(),
            &CtorIndex::default(),
        )
        .unwrap();
        assert_eq!(fs, vec![Formula::Def(t, Term::lt(Term::var(&x), Term::Int(3)))]);
    }
}
