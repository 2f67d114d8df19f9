use std::collections::{BTreeMap, BTreeSet};

use super::{Coefficient, MclassError, MotivicClass, RingTag};

/// A named generator of a Grothendieck ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumSymbol {
    pub name: String,
    /// Order m of a μ_m-action, for symbols of equivariant classes.
    pub action_tag: Option<u32>,
    pub note: String,
}

/// Symbol table with oriented rewrite rules (`symbol := class`) and
/// universal-homeomorphism identifications between symbols.
///
/// Registration mutates the session; everything else is read-only.
#[derive(Debug, Clone)]
pub struct Session<C> {
    symbols: BTreeMap<String, StratumSymbol>,
    rules: BTreeMap<String, MotivicClass<C>>,
    /// Union-find parent pointers for identified symbols.
    aliases: BTreeMap<String, String>,
}

impl<C: Coefficient> Default for Session<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Coefficient> Session<C> {
    pub fn new() -> Self {
        Session { symbols: BTreeMap::new(), rules: BTreeMap::new(), aliases: BTreeMap::new() }
    }

    pub fn declare(&mut self, symbol: StratumSymbol) -> Result<(), MclassError> {
        if self.symbols.contains_key(&symbol.name) {
            return Err(MclassError::DuplicateSymbol(symbol.name));
        }
        self.symbols.insert(symbol.name.clone(), symbol);
        Ok(())
    }

    pub fn declare_plain(&mut self, name: &str, note: &str) -> Result<(), MclassError> {
        self.declare(StratumSymbol { name: name.into(), action_tag: None, note: note.into() })
    }

    pub fn declare_acted(&mut self, name: &str, order: u32, note: &str) -> Result<(), MclassError> {
        self.declare(StratumSymbol { name: name.into(), action_tag: Some(order), note: note.into() })
    }

    pub fn symbol(&self, name: &str) -> Option<&StratumSymbol> {
        self.symbols.get(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &StratumSymbol> {
        self.symbols.values()
    }

    /// Order of the action on `name`; undeclared symbols are not acted on.
    pub fn action_tag(&self, name: &str) -> Option<u32> {
        self.symbols.get(name).and_then(|s| s.action_tag)
    }

    pub fn rule(&self, name: &str) -> Option<&MotivicClass<C>> {
        self.rules.get(name)
    }

    fn ensure_declared(&mut self, name: &str) {
        if !self.symbols.contains_key(name) {
            self.symbols.insert(name.to_string(), StratumSymbol { name: name.into(), action_tag: None, note: String::new() });
        }
    }

    /// Registers `total := closed + open`.
    pub fn scissors(&mut self, total: &str, closed: &MotivicClass<C>, open: &MotivicClass<C>) -> Result<(), MclassError> {
        let sum = closed.add(open)?;
        self.define(total, sum)
    }

    /// Registers `name := class`. Undeclared symbols are declared as plain.
    pub fn define(&mut self, name: &str, class: MotivicClass<C>) -> Result<(), MclassError> {
        if self.rules.contains_key(name) {
            return Err(MclassError::SymbolAlreadyDefined(name.into()));
        }
        if self.reaches(&class, name) {
            return Err(MclassError::CircularDefinition(name.into()));
        }
        self.ensure_declared(name);
        for s in class.symbols() {
            self.ensure_declared(&s);
        }
        self.rules.insert(name.to_string(), class);
        Ok(())
    }

    /// Whether expanding `class` through the rules can produce `target`.
    fn reaches(&self, class: &MotivicClass<C>, target: &str) -> bool {
        let mut stack: Vec<String> = class.symbols();
        let mut seen = BTreeSet::new();
        while let Some(s) = stack.pop() {
            if s == target {
                return true;
            }
            if !seen.insert(s.clone()) {
                continue;
            }
            if let Some(r) = self.rules.get(&s) {
                stack.extend(r.symbols());
            }
        }
        false
    }

    fn root(&self, name: &str) -> String {
        let mut cur = name.to_string();
        while let Some(next) = self.aliases.get(&cur) {
            cur = next.clone();
        }
        cur
    }

    /// Declares `a` and `b` universally homeomorphic. Only meaningful in the
    /// modified rings, so `tag` must be a *_mod tag. The lexicographically
    /// smaller root becomes the representative.
    pub fn identify(&mut self, a: &str, b: &str, tag: RingTag) -> Result<(), MclassError> {
        if !tag.is_mod() {
            return Err(MclassError::IdentificationRequiresModTag(tag));
        }
        self.ensure_declared(a);
        self.ensure_declared(b);
        let (ra, rb) = (self.root(a), self.root(b));
        if ra != rb {
            let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.aliases.insert(drop, keep);
        }
        Ok(())
    }

    pub fn representative(&self, name: &str) -> String {
        self.root(name)
    }

    /// Applies identifications (only under *_mod tags).
    pub fn resolve_aliases(&self, class: &MotivicClass<C>) -> MotivicClass<C> {
        if !class.tag().is_mod() || self.aliases.is_empty() {
            return class.clone();
        }
        let mut out = class.clone();
        for s in class.symbols() {
            let r = self.root(&s);
            if r != s {
                out = out.rename(&s, &r);
            }
        }
        out
    }

    /// Symbols of `class` that have a rewrite rule, in name order.
    pub fn rewritable_symbols(&self, class: &MotivicClass<C>) -> Vec<String> {
        class.symbols().into_iter().filter(|s| self.rules.contains_key(s)).collect()
    }

    /// One rewrite step: substitute the rule for `name`.
    pub fn rewrite(&self, class: &MotivicClass<C>, name: &str) -> Result<MotivicClass<C>, MclassError> {
        match self.rules.get(name) {
            Some(rule) => class.substitute(name, rule),
            None => Ok(class.clone()),
        }
    }

    /// Rewrites until no defined symbol remains. Terminates because the
    /// rule graph is acyclic.
    pub fn canonicalize(&self, class: &MotivicClass<C>) -> Result<MotivicClass<C>, MclassError> {
        let mut cur = self.resolve_aliases(class);
        loop {
            let todo = self.rewritable_symbols(&cur);
            let Some(first) = todo.first() else { break };
            cur = self.rewrite(&cur, first)?;
            cur = self.resolve_aliases(&cur);
        }
        Ok(cur)
    }

    pub fn equal(&self, a: &MotivicClass<C>, b: &MotivicClass<C>) -> Result<bool, MclassError> {
        Ok(self.canonicalize(a)? == self.canonicalize(b)?)
    }

    /// Checks that acted symbols only occur in classes whose equivariant tag
    /// accommodates them.
    pub fn check_class(&self, class: &MotivicClass<C>) -> Result<(), MclassError> {
        for s in class.symbols() {
            if let Some(order) = self.action_tag(&s) {
                let ok = class.tag().equivariant().is_some_and(|m| m % order == 0);
                if !ok {
                    return Err(MclassError::EquivariantSymbol { symbol: s, order, tag: class.tag() });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    type Cl = MotivicClass<BigInt>;

    #[test]
    fn affine_line_decomposes() {
        let mut s = Session::<BigInt>::new();
        let l = Cl::lefschetz(RingTag::K0);
        let one = Cl::one(RingTag::K0);
        s.define("Gm", l.sub(&one).unwrap()).unwrap();
        s.scissors("A1", &one, &Cl::symbol(RingTag::K0, "Gm")).unwrap();
        assert_eq!(s.canonicalize(&Cl::symbol(RingTag::K0, "A1")).unwrap(), l);
        s.scissors("P1", &one, &Cl::symbol(RingTag::K0, "A1")).unwrap();
        assert_eq!(s.canonicalize(&Cl::symbol(RingTag::K0, "P1")).unwrap(), one.add(&l).unwrap());
    }

    #[test]
    fn redefinition_and_cycles_rejected() {
        let mut s = Session::<BigInt>::new();
        let one = Cl::one(RingTag::K0);
        s.define("X", Cl::symbol(RingTag::K0, "Y")).unwrap();
        assert_eq!(s.define("X", one.clone()), Err(MclassError::SymbolAlreadyDefined("X".into())));
        assert_eq!(s.define("Y", Cl::symbol(RingTag::K0, "X")), Err(MclassError::CircularDefinition("Y".into())));
        assert_eq!(s.define("Z", Cl::symbol(RingTag::K0, "Z")), Err(MclassError::CircularDefinition("Z".into())));
    }

    #[test]
    fn xy2_special_fiber() {
        // X0 = E1 + E2 - E12 with two affine lines meeting in a point
        let mut s = Session::<BigInt>::new();
        let l = Cl::lefschetz(RingTag::K0);
        s.define("E1", l.clone()).unwrap();
        s.define("E2", l.clone()).unwrap();
        s.define("E12", Cl::one(RingTag::K0)).unwrap();
        let x0 = Cl::symbol(RingTag::K0, "E1")
            .add(&Cl::symbol(RingTag::K0, "E2"))
            .unwrap()
            .sub(&Cl::symbol(RingTag::K0, "E12"))
            .unwrap();
        let expected = l.scale(&BigInt::from(2)).sub(&Cl::one(RingTag::K0)).unwrap();
        assert_eq!(s.canonicalize(&x0).unwrap(), expected);
    }

    #[test]
    fn identification_only_in_mod_rings() {
        let mut s = Session::<BigInt>::new();
        assert_eq!(s.identify("Y", "X", RingTag::K0), Err(MclassError::IdentificationRequiresModTag(RingTag::K0)));
        s.identify("Y", "X", RingTag::K0_MOD).unwrap();
        let y_mod = Cl::symbol(RingTag::K0_MOD, "Y");
        assert_eq!(s.canonicalize(&y_mod).unwrap(), Cl::symbol(RingTag::K0_MOD, "X"));
        // the plain ring keeps the symbols apart
        let y = Cl::symbol(RingTag::K0, "Y");
        assert_eq!(s.canonicalize(&y).unwrap(), y);
    }

    #[test]
    fn duplicate_declaration() {
        let mut s = Session::<BigInt>::new();
        s.declare_acted("G", 2, "double cover").unwrap();
        assert_eq!(s.declare_plain("G", ""), Err(MclassError::DuplicateSymbol("G".into())));
        assert!(s.check_class(&Cl::symbol(RingTag::K0, "G")).is_err());
        assert!(s.check_class(&Cl::symbol(RingTag::k0_eq(4), "G")).is_ok());
    }
}
