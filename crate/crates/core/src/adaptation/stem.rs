//! Porter's suffix-stripping stemmer, in its original 1980 formulation.
//! Conflating "account"/"accounts" or "hosting"/"host" is what lets product
//! types match across morphological variants; later revisions of the
//! algorithm change a handful of words, so the rule set is pinned to the
//! classic one.

/// Stems a single token. The input is case-folded first; tokens containing
/// anything but ASCII letters (prices, URLs, smileys) are returned
/// lowercased but otherwise untouched.
pub fn stem(word: &str) -> String {
    let lower = word.to_lowercase();
    if lower.len() <= 2 || !lower.bytes().all(|b| b.is_ascii_lowercase()) {
        return lower;
    }
    let mut s = Stemmer { b: lower.into_bytes(), j: 0 };
    s.step1ab();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    String::from_utf8(s.b).unwrap()
}

/// Stems every element; convenience for type-level comparisons.
pub fn stem_all<'a>(words: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    words.into_iter().map(stem).collect()
}

struct Stemmer {
    b: Vec<u8>,
    /// End of the stem once a candidate suffix is split off (inclusive).
    j: usize,
}

impl Stemmer {
    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// Number of consonant-vowel-consonant transitions in b[0..=j].
    fn measure(&self) -> usize {
        let mut n = 0;
        let mut i = 0;
        let end = self.j + 1;
        while i < end && self.cons(i) {
            i += 1;
        }
        loop {
            while i < end && !self.cons(i) {
                i += 1;
            }
            if i >= end {
                return n;
            }
            n += 1;
            while i < end && self.cons(i) {
                i += 1;
            }
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..=self.j).any(|i| !self.cons(i))
    }

    fn double_cons(&self, i: usize) -> bool {
        i >= 1 && self.b[i] == self.b[i - 1] && self.cons(i)
    }

    /// consonant - vowel - consonant at i, where the final consonant is not
    /// w, x, or y; signals a short stem like "hop" that takes back an "e".
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.b[i], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, suffix: &str) -> bool {
        let s = suffix.as_bytes();
        if s.len() >= self.b.len() || !self.b.ends_with(s) {
            return false;
        }
        self.j = self.b.len() - s.len() - 1;
        true
    }

    fn set_to(&mut self, suffix: &str) {
        self.b.truncate(self.j + 1);
        self.b.extend_from_slice(suffix.as_bytes());
    }

    fn replace_if_measure(&mut self, suffix: &str) {
        if self.measure() > 0 {
            self.set_to(suffix);
        }
    }

    fn step1ab(&mut self) {
        if self.b.last() == Some(&b's') {
            if self.ends("sses") {
                self.b.truncate(self.b.len() - 2);
            } else if self.ends("ies") {
                self.set_to("i");
            } else if self.b.len() >= 2 && self.b[self.b.len() - 2] != b's' {
                self.b.pop();
            }
        }
        let mut cleanup = false;
        if self.ends("eed") {
            if self.measure() > 0 {
                self.b.pop();
            }
        } else if (self.ends("ed") || self.ends("ing")) && self.vowel_in_stem() {
            self.b.truncate(self.j + 1);
            cleanup = true;
        }
        if cleanup {
            self.j = self.b.len().saturating_sub(1);
            if self.ends("at") || self.ends("bl") || self.ends("iz") {
                self.b.push(b'e');
            } else if !self.b.is_empty() && self.double_cons(self.b.len() - 1) {
                if !matches!(self.b.last(), Some(&b'l') | Some(&b's') | Some(&b'z')) {
                    self.b.pop();
                }
            } else {
                self.j = self.b.len() - 1;
                if self.measure() == 1 && self.cvc(self.b.len() - 1) {
                    self.b.push(b'e');
                }
            }
        }
    }

    fn step1c(&mut self) {
        if self.ends("y") && self.vowel_in_stem() {
            *self.b.last_mut().unwrap() = b'i';
        }
    }

    fn step2(&mut self) {
        let rules: &[(&str, &str)] = &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ];
        for &(suf, rep) in rules {
            if self.ends(suf) {
                self.replace_if_measure(rep);
                return;
            }
        }
    }

    fn step3(&mut self) {
        let rules: &[(&str, &str)] = &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ];
        for &(suf, rep) in rules {
            if self.ends(suf) {
                self.replace_if_measure(rep);
                return;
            }
        }
    }

    fn step4(&mut self) {
        let suffixes: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent",
            "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
        ];
        for &suf in suffixes {
            if self.ends(suf) {
                if suf == "ion" && !matches!(self.b.get(self.j), Some(&b's') | Some(&b't')) {
                    continue;
                }
                if self.measure() > 1 {
                    self.b.truncate(self.j + 1);
                }
                return;
            }
        }
    }

    fn step5(&mut self) {
        if self.b.len() >= 2 && self.b.last() == Some(&b'e') {
            self.j = self.b.len() - 2;
            let m = self.measure();
            if m > 1 || (m == 1 && !self.cvc(self.b.len() - 2)) {
                self.b.pop();
            }
        }
        self.j = self.b.len() - 1;
        if self.b.last() == Some(&b'l') && self.double_cons(self.b.len() - 1) && self.measure() > 1
        {
            self.b.pop();
        }
    }
}
