use std::fmt;

/// Largest program accepted by the parser and produced by mutation.
pub const MAX_NODES: usize = 512;

/// Per-unit, per-period quantities a priority program can read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    CostRate,
    PMin,
    PMax,
    MinUp,
    MinDown,
    Demand,
    ResidualDemand,
    HoursInState,
    IsOn,
    Period,
    Horizon,
    Units,
}

impl Feature {
    pub const ALL: [Feature; 12] = [
        Feature::CostRate,
        Feature::PMin,
        Feature::PMax,
        Feature::MinUp,
        Feature::MinDown,
        Feature::Demand,
        Feature::ResidualDemand,
        Feature::HoursInState,
        Feature::IsOn,
        Feature::Period,
        Feature::Horizon,
        Feature::Units,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::CostRate => "cost_rate",
            Feature::PMin => "p_min",
            Feature::PMax => "p_max",
            Feature::MinUp => "min_up",
            Feature::MinDown => "min_down",
            Feature::Demand => "demand",
            Feature::ResidualDemand => "residual_demand",
            Feature::HoursInState => "hours_in_state",
            Feature::IsOn => "is_on",
            Feature::Period => "t",
            Feature::Horizon => "T",
            Feature::Units => "N",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Feature::CostRate => "generation cost of the unit, $/MWh",
            Feature::PMin => "minimum output when on, MW",
            Feature::PMax => "maximum output when on, MW",
            Feature::MinUp => "minimum consecutive on-periods",
            Feature::MinDown => "minimum consecutive off-periods",
            Feature::Demand => "load of the current period, MW",
            Feature::ResidualDemand => "load minus capacity of units already forced on, MW",
            Feature::HoursInState => "periods the unit has held its previous state",
            Feature::IsOn => "1 if the unit was on in the previous period, else 0",
            Feature::Period => "current period index, from 0",
            Feature::Horizon => "number of periods",
            Feature::Units => "number of units",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Min,
    Max,
    Abs,
    If,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
            Func::If => "if",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            Func::Abs => 1,
            Func::If => 3,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        [Func::Min, Func::Max, Func::Abs, Func::If]
            .into_iter()
            .find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::Div => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Feature(Feature),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

const PREC_CMP: u8 = 1;
const PREC_UNARY: u8 = 4;

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().map(Expr::node_count).sum::<usize>()
    }

    pub fn children(&self) -> Box<dyn Iterator<Item = &Expr> + '_> {
        match self {
            Expr::Num(_) | Expr::Feature(_) => Box::new(std::iter::empty()),
            Expr::Neg(e) => Box::new(std::iter::once(e.as_ref())),
            Expr::Binary(_, l, r) | Expr::Compare(_, l, r) => {
                Box::new([l.as_ref(), r.as_ref()].into_iter())
            }
            Expr::Call(_, args) => Box::new(args.iter()),
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Expr> {
        match self {
            Expr::Num(_) | Expr::Feature(_) => Vec::new(),
            Expr::Neg(e) => vec![e.as_mut()],
            Expr::Binary(_, l, r) | Expr::Compare(_, l, r) => vec![l.as_mut(), r.as_mut()],
            Expr::Call(_, args) => args.iter_mut().collect(),
        }
    }

    /// Subtree at `index` in pre-order numbering (0 is the root).
    pub fn subtree(&self, index: usize) -> Option<&Expr> {
        fn walk<'a>(e: &'a Expr, index: &mut usize) -> Option<&'a Expr> {
            if *index == 0 {
                return Some(e);
            }
            *index -= 1;
            e.children().find_map(|c| walk(c, index))
        }
        let mut index = index;
        walk(self, &mut index)
    }

    pub fn subtree_mut(&mut self, index: usize) -> Option<&mut Expr> {
        fn walk<'a>(e: &'a mut Expr, index: &mut usize) -> Option<&'a mut Expr> {
            if *index == 0 {
                return Some(e);
            }
            *index -= 1;
            for c in e.children_mut() {
                let size = c.node_count();
                if *index < size {
                    return walk(c, index);
                }
                *index -= size;
            }
            None
        }
        let mut index = index;
        walk(self, &mut index)
    }

    /// Pre-order indices of nodes matching `pred`.
    pub fn positions(&self, pred: impl Fn(&Expr) -> bool) -> Vec<usize> {
        fn walk(e: &Expr, next: &mut usize, pred: &dyn Fn(&Expr) -> bool, out: &mut Vec<usize>) {
            if pred(e) {
                out.push(*next);
            }
            *next += 1;
            for c in e.children() {
                walk(c, next, pred, out);
            }
        }
        let mut out = Vec::new();
        walk(self, &mut 0, &pred, &mut out);
        out
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Feature(feat) => f.write_str(feat.name()),
            Expr::Neg(e) => {
                let paren = PREC_UNARY < min_prec;
                if paren {
                    f.write_str("(")?;
                }
                f.write_str("-")?;
                e.write_prec(f, PREC_UNARY)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Binary(op, l, r) => {
                let prec = op.precedence();
                let paren = prec < min_prec;
                if paren {
                    f.write_str("(")?;
                }
                l.write_prec(f, prec)?;
                write!(f, " {} ", op.symbol())?;
                r.write_prec(f, prec + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Compare(op, l, r) => {
                let paren = PREC_CMP < min_prec;
                if paren {
                    f.write_str("(")?;
                }
                l.write_prec(f, PREC_CMP + 1)?;
                write!(f, " {} ", op.symbol())?;
                r.write_prec(f, PREC_CMP + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    a.write_prec(f, 0)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Canonical source text with minimal parentheses.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtree_indexing_is_preorder() {
        // (cost_rate + 2) * -p_max
        let e = Expr::binary(
            BinOp::Mul,
            Expr::binary(BinOp::Add, Expr::Feature(Feature::CostRate), Expr::Num(2.0)),
            Expr::Neg(Box::new(Expr::Feature(Feature::PMax))),
        );
        assert_eq!(e.node_count(), 6);
        assert_eq!(e.subtree(2), Some(&Expr::Feature(Feature::CostRate)));
        assert_eq!(e.subtree(5), Some(&Expr::Feature(Feature::PMax)));
        assert_eq!(e.subtree(6), None);
        let mut m = e.clone();
        *m.subtree_mut(3).unwrap() = Expr::Num(7.0);
        assert_eq!(m.to_string(), "(cost_rate + 7) * -p_max");
        assert_eq!(e.positions(|x| matches!(x, Expr::Feature(_))), vec![2, 5]);
    }

    #[test]
    fn display_minimal_parens() {
        let e = Expr::binary(
            BinOp::Sub,
            Expr::Feature(Feature::PMax),
            Expr::binary(BinOp::Sub, Expr::Feature(Feature::PMin), Expr::Num(1.5)),
        );
        assert_eq!(e.to_string(), "p_max - (p_min - 1.5)");
    }
}
