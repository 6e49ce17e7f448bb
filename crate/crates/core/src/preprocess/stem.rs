//! Snowball English (Porter2) stemmer.
//!
//! Suffix stripping over ASCII lowercase words. Tokens containing anything
//! other than lowercase ASCII letters (mapped tokens like `NEGEX`, merged
//! collocations with `_`) pass through unchanged.

/// Stem a single token. Non-lowercase-alphabetic tokens are returned as-is.
pub fn stem(token: &str) -> String {
    if token.len() <= 2 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.to_string();
    }
    porter2(token.as_bytes())
}

const VOWELS: &[u8] = b"aeiouy";

fn is_vowel(b: u8) -> bool {
    VOWELS.contains(&b) // 'Y' (consonant-marked y) is not a vowel
}

fn is_double(a: u8, b: u8) -> bool {
    a == b && b"bdfgmnprt".contains(&a)
}

fn valid_li_ending(b: u8) -> bool {
    b"cdeghkmnrt".contains(&b)
}

// Irregular forms handled before the algorithm proper.
const EXCEPTION1: &[(&[u8], &[u8])] = &[
    (b"skis", b"ski"),
    (b"skies", b"sky"),
    (b"dying", b"die"),
    (b"lying", b"lie"),
    (b"tying", b"tie"),
    (b"idly", b"idl"),
    (b"gently", b"gentl"),
    (b"ugly", b"ugli"),
    (b"early", b"earli"),
    (b"only", b"onli"),
    (b"singly", b"singl"),
    (b"sky", b"sky"),
    (b"news", b"news"),
    (b"howe", b"howe"),
    (b"atlas", b"atlas"),
    (b"cosmos", b"cosmos"),
    (b"bias", b"bias"),
    (b"andes", b"andes"),
];

// Words invariant after step 1a.
const EXCEPTION2: &[&[u8]] = &[
    b"inning", b"outing", b"canning", b"herring", b"earring", b"proceed", b"exceed", b"succeed",
];

struct Word {
    b: Vec<u8>,
    r1: usize,
    r2: usize,
}

impl Word {
    fn len(&self) -> usize {
        self.b.len()
    }

    fn ends_with(&self, suffix: &[u8]) -> bool {
        self.b.ends_with(suffix)
    }

    /// True when the given suffix lies entirely inside R1.
    fn in_r1(&self, suffix: &[u8]) -> bool {
        self.len() - suffix.len() >= self.r1
    }

    fn in_r2(&self, suffix: &[u8]) -> bool {
        self.len() - suffix.len() >= self.r2
    }

    fn truncate(&mut self, new_len: usize) {
        self.b.truncate(new_len);
    }

    fn replace_suffix(&mut self, suffix_len: usize, replacement: &[u8]) {
        let keep = self.b.len() - suffix_len;
        self.b.truncate(keep);
        self.b.extend_from_slice(replacement);
    }

    /// A vowel anywhere before byte position `end` (exclusive).
    fn has_vowel_before(&self, end: usize) -> bool {
        self.b[..end].iter().any(|&c| is_vowel(c))
    }
}

/// Short syllable at the end of `part`: either a non-vowel followed by a
/// vowel followed by a non-vowel other than w/x/Y, or a word that is just a
/// vowel followed by a non-vowel.
fn ends_with_short_syllable(part: &[u8]) -> bool {
    let n = part.len();
    if n == 2 {
        return is_vowel(part[0]) && !is_vowel(part[1]);
    }
    if n >= 3 {
        let (a, b, c) = (part[n - 3], part[n - 2], part[n - 1]);
        return !is_vowel(a) && is_vowel(b) && !is_vowel(c) && c != b'w' && c != b'x' && c != b'Y';
    }
    false
}

fn porter2(input: &[u8]) -> String {
    for &(from, to) in EXCEPTION1 {
        if input == from {
            return String::from_utf8(to.to_vec()).unwrap();
        }
    }

    let mut b = input.to_vec();

    // Mark y's that function as consonants.
    if b[0] == b'y' {
        b[0] = b'Y';
    }
    for i in 1..b.len() {
        if b[i] == b'y' && is_vowel(b[i - 1]) {
            b[i] = b'Y';
        }
    }

    let (r1, r2) = mark_regions(&b);
    let mut w = Word { b, r1, r2 };

    step_1a(&mut w);
    if EXCEPTION2.contains(&w.b.as_slice()) {
        return String::from_utf8(w.b).unwrap();
    }
    step_1b(&mut w);
    step_1c(&mut w);
    step_2(&mut w);
    step_3(&mut w);
    step_4(&mut w);
    step_5(&mut w);

    for c in w.b.iter_mut() {
        if *c == b'Y' {
            *c = b'y';
        }
    }
    String::from_utf8(w.b).unwrap()
}

fn mark_regions(b: &[u8]) -> (usize, usize) {
    // R1 is fixed past these prefixes regardless of the vowel rule.
    let r1 = if b.starts_with(b"gener") || b.starts_with(b"arsen") {
        5
    } else if b.starts_with(b"commun") {
        6
    } else {
        region_after_first_nonvowel(b, 0)
    };
    let r2 = region_after_first_nonvowel(b, r1);
    (r1, r2)
}

fn region_after_first_nonvowel(b: &[u8], start: usize) -> usize {
    let mut i = start;
    while i < b.len() && !is_vowel(b[i]) {
        i += 1;
    }
    while i < b.len() && is_vowel(b[i]) {
        i += 1;
    }
    // i now sits on the first non-vowel following a vowel (or at the end)
    if i < b.len() {
        i + 1
    } else {
        b.len()
    }
}

fn step_1a(w: &mut Word) {
    let n = w.len();
    if w.ends_with(b"sses") {
        w.replace_suffix(4, b"ss");
    } else if w.ends_with(b"ied") || w.ends_with(b"ies") {
        if n > 4 {
            w.replace_suffix(3, b"i");
        } else {
            w.replace_suffix(3, b"ie");
        }
    } else if w.ends_with(b"us") || w.ends_with(b"ss") {
        // leave alone
    } else if w.ends_with(b"s") {
        // delete if there is a vowel before the letter preceding the s
        if n >= 3 && w.has_vowel_before(n - 2) {
            w.truncate(n - 1);
        }
    }
}

fn step_1b(w: &mut Word) {
    // longest of: eedly eed / ingly edly ing ed
    for suf in [b"eedly".as_slice(), b"eed".as_slice()] {
        if w.ends_with(suf) {
            if w.in_r1(suf) {
                let keep = w.len() - suf.len();
                w.truncate(keep);
                w.b.extend_from_slice(b"ee");
            }
            return;
        }
    }
    for suf in [
        b"ingly".as_slice(),
        b"edly".as_slice(),
        b"ing".as_slice(),
        b"ed".as_slice(),
    ] {
        if w.ends_with(suf) {
            let keep = w.len() - suf.len();
            if w.has_vowel_before(keep) {
                w.truncate(keep);
                let n = w.len();
                if w.ends_with(b"at") || w.ends_with(b"bl") || w.ends_with(b"iz") {
                    w.b.push(b'e');
                } else if n >= 2 && is_double(w.b[n - 2], w.b[n - 1]) {
                    w.truncate(n - 1);
                } else if w.r1 >= w.len() && ends_with_short_syllable(&w.b) {
                    w.b.push(b'e');
                }
            }
            return;
        }
    }
}

fn step_1c(w: &mut Word) {
    let n = w.len();
    if n > 2 && (w.b[n - 1] == b'y' || w.b[n - 1] == b'Y') && !is_vowel(w.b[n - 2]) {
        w.b[n - 1] = b'i';
    }
}

fn step_2(w: &mut Word) {
    // (suffix, replacement) pairs; longest match wins, then the R1 check.
    const MAP: &[(&[u8], &[u8])] = &[
        (b"ization", b"ize"),
        (b"ational", b"ate"),
        (b"fulness", b"ful"),
        (b"ousness", b"ous"),
        (b"iveness", b"ive"),
        (b"tional", b"tion"),
        (b"biliti", b"ble"),
        (b"lessli", b"less"),
        (b"entli", b"ent"),
        (b"ation", b"ate"),
        (b"alism", b"al"),
        (b"aliti", b"al"),
        (b"ousli", b"ous"),
        (b"iviti", b"ive"),
        (b"fulli", b"ful"),
        (b"enci", b"ence"),
        (b"anci", b"ance"),
        (b"abli", b"able"),
        (b"izer", b"ize"),
        (b"ator", b"ate"),
        (b"alli", b"al"),
        (b"bli", b"ble"),
    ];
    for &(suf, rep) in MAP {
        if w.ends_with(suf) {
            if w.in_r1(suf) {
                w.replace_suffix(suf.len(), rep);
            }
            return;
        }
    }
    if w.ends_with(b"ogi") {
        if w.in_r1(b"ogi") && w.len() >= 4 && w.b[w.len() - 4] == b'l' {
            w.replace_suffix(3, b"og");
        }
        return;
    }
    if w.ends_with(b"li") {
        let n = w.len();
        if w.in_r1(b"li") && n >= 3 && valid_li_ending(w.b[n - 3]) {
            w.truncate(n - 2);
        }
    }
}

fn step_3(w: &mut Word) {
    const MAP: &[(&[u8], &[u8])] = &[
        (b"ational", b"ate"),
        (b"tional", b"tion"),
        (b"alize", b"al"),
        (b"icate", b"ic"),
        (b"iciti", b"ic"),
        (b"ical", b"ic"),
        (b"ness", b""),
        (b"ful", b""),
    ];
    if w.ends_with(b"ative") {
        if w.in_r2(b"ative") {
            let keep = w.len() - 5;
            w.truncate(keep);
        }
        return;
    }
    for &(suf, rep) in MAP {
        if w.ends_with(suf) {
            if w.in_r1(suf) {
                w.replace_suffix(suf.len(), rep);
            }
            return;
        }
    }
}

fn step_4(w: &mut Word) {
    const SUFFIXES: &[&[u8]] = &[
        b"ement", b"ance", b"ence", b"able", b"ible", b"ment", b"ant", b"ent", b"ism", b"ate",
        b"iti", b"ous", b"ive", b"ize", b"al", b"er", b"ic",
    ];
    if w.ends_with(b"ion") {
        let n = w.len();
        if w.in_r2(b"ion") && n >= 4 && (w.b[n - 4] == b's' || w.b[n - 4] == b't') {
            w.truncate(n - 3);
        }
        return;
    }
    for &suf in SUFFIXES {
        if w.ends_with(suf) {
            if w.in_r2(suf) {
                let keep = w.len() - suf.len();
                w.truncate(keep);
            }
            return;
        }
    }
}

fn step_5(w: &mut Word) {
    let n = w.len();
    if n == 0 {
        return;
    }
    if w.b[n - 1] == b'e' {
        if w.in_r2(b"e") || (w.in_r1(b"e") && !ends_with_short_syllable(&w.b[..n - 1])) {
            w.truncate(n - 1);
        }
    } else if w.b[n - 1] == b'l' && w.in_r2(b"l") && n >= 2 && w.b[n - 2] == b'l' {
        w.truncate(n - 1);
    }
}
