use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::formula::{free_vars, Formula, Model, SolverResult, Sort, Term, Val, Var};
use super::SolverError;

/// Environment variable naming the default SMT solver binary.
pub const SOLVER_ENV: &str = "BJY_SOLVER";

/// An SMT-LIB2 solver run as a fresh subprocess per query.
#[derive(Clone, Debug)]
pub struct SmtSolver {
    pub path: PathBuf,
    pub timeout: Duration,
    /// Free integer variables are constrained to this range when set.
    pub int_bounds: Option<(i64, i64)>,
    /// When set, every query script is written here.
    pub debug_dir: Option<PathBuf>,
    queries: u64,
}

impl SmtSolver {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        SmtSolver {
            path: path.into(),
            timeout: Duration::from_secs(10),
            int_bounds: None,
            debug_dir: None,
            queries: 0,
        }
    }

    /// `$BJY_SOLVER`, else `z3` or `cvc5` found on `PATH`.
    pub fn discover() -> Option<Self> {
        if let Some(p) = std::env::var_os(SOLVER_ENV).filter(|p| !p.is_empty()) {
            return Some(Self::new(PathBuf::from(p)));
        }
        ["z3", "cvc5"].iter().find_map(|name| find_on_path(name)).map(Self::new)
    }

    fn args(&self) -> Vec<&'static str> {
        let name = self
            .path
            .file_name()
            .map(|n| n.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if name.contains("cvc") {
            vec!["--lang=smt2", "--produce-models", "-q"]
        } else {
            vec!["-in", "-smt2"]
        }
    }

    /// Runs a trivial query to confirm the binary starts and speaks SMT-LIB.
    pub fn probe(&mut self) -> Result<(), SolverError> {
        match self.check(&[Formula::Assert(Term::Bool(true))])? {
            SolverResult::Sat(_) => Ok(()),
            other => Err(SolverError::Unavailable(format!(
                "{} answered {other:?} to a trivial query",
                self.path.display()
            ))),
        }
    }

    pub fn check(&mut self, formulas: &[Formula]) -> Result<SolverResult, SolverError> {
        let free = free_vars(formulas);
        let script = script(formulas, &free, self.int_bounds);
        self.queries += 1;
        if let Some(dir) = &self.debug_dir {
            let _ = std::fs::create_dir_all(dir);
            let _ = std::fs::write(dir.join(format!("query{:05}.smt2", self.queries)), &script);
        }
        let mut child = Command::new(&self.path)
            .args(self.args())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Unavailable(format!("{}: {e}", self.path.display())))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut out = String::new();
            let _ = stdout.read_to_string(&mut out);
            out
        });
        let write_result = stdin.write_all(script.as_bytes());
        drop(stdin);
        let status = child
            .wait_timeout(self.timeout)
            .map_err(|e| SolverError::Protocol(e.to_string()))?;
        if status.is_none() {
            let _ = child.kill();
            let _ = child.wait();
            let _ = reader.join();
            return Ok(SolverResult::Unknown);
        }
        let out = reader.join().unwrap_or_default();
        write_result.map_err(|e| SolverError::Protocol(format!("writing query: {e}")))?;
        parse_response(&out, &free)
    }
}

fn find_on_path(name: &str) -> Option<PathBuf> {
    let paths = std::env::var_os("PATH")?;
    std::env::split_paths(&paths)
        .map(|dir| dir.join(name))
        .find(|p| is_executable(p))
}

fn is_executable(p: &Path) -> bool {
    p.is_file()
}

fn symbol(v: &Var) -> String {
    format!("|{}@{}|", v.key.id, v.key.depth)
}

fn sort_name(s: Sort) -> String {
    match s {
        Sort::Int | Sort::Fun => "Int".into(),
        Sort::Bool => "Bool".into(),
        Sort::Bits(w) => format!("(_ BitVec {w})"),
    }
}

fn int_lit(n: i128) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

pub fn term_to_smt(t: &Term) -> String {
    let bin = |op: &str, a: &Term, b: &Term| format!("({op} {} {})", term_to_smt(a), term_to_smt(b));
    match t {
        Term::Var(v) => symbol(v),
        Term::Int(n) => int_lit(*n as i128),
        Term::Bool(b) => b.to_string(),
        Term::Bits { value, width } => {
            let mut s = String::from("#b");
            for i in (0..*width).rev() {
                s.push(if value >> i & 1 == 1 { '1' } else { '0' });
            }
            s
        }
        Term::FunId(n) => n.to_string(),
        Term::Add(a, b) => bin("+", a, b),
        Term::Sub(a, b) => bin("-", a, b),
        Term::Lt(a, b) => bin("<", a, b),
        Term::Le(a, b) => bin("<=", a, b),
        Term::Gt(a, b) => bin(">", a, b),
        Term::Ge(a, b) => bin(">=", a, b),
        Term::Eq(a, b) => bin("=", a, b),
        Term::Not(a) => format!("(not {})", term_to_smt(a)),
        Term::And(a, b) => bin("and", a, b),
        Term::Or(a, b) => bin("or", a, b),
        Term::Xor(a, b) => bin("xor", a, b),
        Term::BitAnd(a, b) => bin("bvand", a, b),
    }
}

/// A complete, self-contained SMT-LIB2 script for one query.
pub fn script(formulas: &[Formula], free: &[Var], int_bounds: Option<(i64, i64)>) -> String {
    let mut s = String::from("(set-option :produce-models true)\n(set-logic ALL)\n");
    let mut declared = std::collections::HashSet::new();
    for f in formulas {
        f.for_each_var(&mut |v| {
            if declared.insert(v.clone()) {
                let _ = writeln!(s, "(declare-const {} {})", symbol(v), sort_name(v.sort()));
            }
        });
    }
    if let Some((lo, hi)) = int_bounds {
        for v in free.iter().filter(|v| v.sort() == Sort::Int) {
            let x = symbol(v);
            let _ = writeln!(
                s,
                "(assert (and (<= {} {x}) (<= {x} {})))",
                int_lit(lo as i128),
                int_lit(hi as i128)
            );
        }
    }
    for f in formulas {
        let _ = match f {
            Formula::Def(v, t) => writeln!(s, "(assert (= {} {}))", symbol(v), term_to_smt(t)),
            Formula::Assert(t) => writeln!(s, "(assert {})", term_to_smt(t)),
        };
    }
    s.push_str("(check-sat)\n");
    if !free.is_empty() {
        s.push_str("(get-value (");
        for (i, v) in free.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&symbol(v));
        }
        s.push_str("))\n");
    }
    s.push_str("(exit)\n");
    s
}

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Result<Vec<Sexp>, SolverError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                let done = stack.pop().ok_or_else(|| protocol("unbalanced )"))?;
                stack
                    .last_mut()
                    .ok_or_else(|| protocol("unbalanced )"))?
                    .push(Sexp::List(done));
                i += 1;
            }
            '|' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                i += 1;
                let atom: String = chars[start..i.min(chars.len())].iter().collect();
                stack.last_mut().unwrap().push(Sexp::Atom(atom));
            }
            '"' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                i += 1;
                let atom: String = chars[start..i.min(chars.len())].iter().collect();
                stack.last_mut().unwrap().push(Sexp::Atom(atom));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"()|".contains(chars[i]) {
                    i += 1;
                }
                stack
                    .last_mut()
                    .unwrap()
                    .push(Sexp::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(protocol("unbalanced ("));
    }
    Ok(stack.pop().unwrap())
}

fn protocol(msg: &str) -> SolverError {
    SolverError::Protocol(msg.to_string())
}

fn value(s: &Sexp) -> Option<Val> {
    match s {
        Sexp::Atom(a) if a == "true" => Some(Val::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Val::Bool(false)),
        Sexp::Atom(a) if a.starts_with("#b") => u64::from_str_radix(&a[2..], 2).ok().map(Val::Bits),
        Sexp::Atom(a) if a.starts_with("#x") => u64::from_str_radix(&a[2..], 16).ok().map(Val::Bits),
        Sexp::Atom(a) => a.parse::<i128>().ok().map(Val::Int),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(minus), x] if minus == "-" => match value(x)? {
                Val::Int(n) => Some(Val::Int(-n)),
                _ => None,
            },
            [Sexp::Atom(underscore), Sexp::Atom(bv), _width] if underscore == "_" => {
                bv.strip_prefix("bv")?.parse().ok().map(Val::Bits)
            }
            _ => None,
        },
    }
}

pub(crate) fn parse_response(out: &str, free: &[Var]) -> Result<SolverResult, SolverError> {
    let sexps = parse_sexps(out)?;
    let verdict = match sexps.first() {
        Some(Sexp::Atom(a)) => a.as_str(),
        Some(other) => return Err(SolverError::Protocol(format!("unexpected reply {other:?}"))),
        None => return Err(protocol("empty reply")),
    };
    match verdict {
        "unsat" => Ok(SolverResult::Unsat),
        "unknown" | "timeout" => Ok(SolverResult::Unknown),
        "sat" => {
            let mut model = Model::default();
            if free.is_empty() {
                return Ok(SolverResult::Sat(model));
            }
            let Some(Sexp::List(pairs)) = sexps.get(1) else {
                return Err(protocol("sat without a value list"));
            };
            for pair in pairs {
                let Sexp::List(kv) = pair else {
                    return Err(protocol("malformed value pair"));
                };
                let [Sexp::Atom(name), v] = kv.as_slice() else {
                    return Err(protocol("malformed value pair"));
                };
                let var = free
                    .iter()
                    .find(|v| symbol(v) == *name || symbol(v).trim_matches('|') == name)
                    .ok_or_else(|| SolverError::Protocol(format!("unknown symbol {name}")))?;
                let val = value(v).ok_or_else(|| SolverError::Protocol(format!("bad value {v:?}")))?;
                model.0.insert(var.clone(), val);
            }
            Ok(SolverResult::Sat(model))
        }
        other => Err(SolverError::Protocol(format!("unexpected reply {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{ident, ClauseKey};

    fn v(name: &str, sort: Sort) -> Var {
        Var::new(ClauseKey::new(&ident(name), 2), sort)
    }

    #[test]
    fn script_declares_and_quotes() {
        let x = v("x$1", Sort::Int);
        let fs = vec![Formula::Assert(Term::lt(Term::var(&x), Term::Int(-3)))];
        let s = script(&fs, &[x], Some((-16, 16)));
        assert!(s.contains("(declare-const |x$1@2| Int)"));
        assert!(s.contains("(assert (< |x$1@2| (- 3)))"));
        assert!(s.contains("(<= (- 16) |x$1@2|)"));
        assert!(s.contains("(get-value (|x$1@2|))"));
    }

    #[test]
    fn bitvector_literals_are_msb_first() {
        assert_eq!(term_to_smt(&Term::Bits { value: 0b001, width: 3 }), "#b001");
        assert_eq!(term_to_smt(&Term::Bits { value: 0b101, width: 3 }), "#b101");
    }

    #[test]
    fn responses_parse() {
        let x = v("x$1", Sort::Int);
        let b = v("b$2", Sort::Bool);
        let r = parse_response("sat\n((|x$1@2| (- 5))\n (|b$2@2| true))\n", &[x.clone(), b.clone()]).unwrap();
        let SolverResult::Sat(m) = r else { panic!() };
        assert_eq!(m.get(&x), Some(Val::Int(-5)));
        assert_eq!(m.get(&b), Some(Val::Bool(true)));
        assert_eq!(
            parse_response("unsat\n(error \"model is not available\")\n", &[x]).unwrap(),
            SolverResult::Unsat
        );
    }
}
