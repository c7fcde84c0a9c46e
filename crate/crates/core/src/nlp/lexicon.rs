//! Closed-class word lists and verb morphology for the rule-based parser.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbForm {
    Base,
    Present3,
    Past,
    PastParticiple,
    Gerund,
}

const VERBS: &[&str] = &[
    "abandon", "abuse", "accept", "accuse", "ache", "act", "add", "admire", "admit", "adopt",
    "afford", "agree", "allow", "annoy", "answer", "apologize", "appear", "appreciate", "argue",
    "arrange", "arrive", "ask", "assume", "attack", "attend", "avoid", "babysit", "bake", "ban",
    "beg", "believe", "belong", "betray", "blame", "block", "boast", "book", "borrow", "bother",
    "break", "bring", "build", "bully", "burn", "buy", "call", "calm", "cancel", "care",
    "carry", "celebrate", "change", "charge", "chat", "cheat", "check", "choose", "clean",
    "clear", "close", "come", "comfort", "comment", "complain", "confess", "confront",
    "consider", "contact", "continue", "control", "cook", "cost", "cover", "criticize", "cry",
    "cut", "dance", "date", "deal", "decide", "decline", "defend", "delete", "demand", "deny",
    "deserve", "destroy", "die", "disagree", "disappear", "discuss", "dislike", "divorce",
    "doubt", "drink", "drive", "drop", "eat", "email", "embarrass", "encourage", "end",
    "engage", "enjoy", "excuse", "expect", "explain", "fail", "fall", "fear", "feed", "feel",
    "fight", "fill", "find", "finish", "fire", "fix", "follow", "forbid", "force", "forget",
    "forgive", "gain", "get", "give", "go", "grab", "greet", "grow", "guess", "hang", "happen",
    "hate", "hear", "help", "hide", "hire", "hit", "hold", "hope", "host", "hug", "hurt",
    "ignore", "imagine", "insist", "insult", "interrupt", "invite", "join", "joke", "judge",
    "keep", "kick", "kill", "kiss", "know", "laugh", "lead", "learn", "leave", "lend", "let",
    "lie", "like", "listen", "live", "lock", "look", "lose", "love", "make", "manage", "marry",
    "mean", "meet", "mention", "message", "mind", "miss", "mock", "move", "need", "notice",
    "offend", "offer", "open", "order", "organize", "owe", "own", "pack", "pay", "pick",
    "plan", "play", "please", "point", "post", "prefer", "prepare", "pretend", "prevent",
    "promise", "protect", "prove", "pull", "punish", "push", "put", "quit", "rain", "reach",
    "read", "realize", "receive", "refuse", "regret", "reject", "relax", "remember", "remind",
    "remove", "rent", "reply", "report", "request", "respect", "respond", "rest", "return",
    "ruin", "run", "save", "say", "scream", "see", "seem", "sell", "send", "share", "shout",
    "show", "sing", "sit", "sleep", "smile", "snap", "speak", "spend", "split", "start",
    "stay", "steal", "stop", "storm", "struggle", "study", "suggest", "support", "surprise",
    "swear", "take", "talk", "teach", "tease", "tell", "text", "thank", "think", "threaten",
    "throw", "touch", "travel", "treat", "try", "turn", "understand", "upset", "use", "visit",
    "wait", "wake", "walk", "want", "warn", "wash", "waste", "watch", "wear", "welcome",
    "win", "wish", "work", "worry", "write", "yell",
];

// lemma, past, past participle
const IRREGULAR: &[(&str, &str, &str)] = &[
    ("babysit", "babysat", "babysat"),
    ("be", "was", "been"),
    ("break", "broke", "broken"),
    ("bring", "brought", "brought"),
    ("build", "built", "built"),
    ("burn", "burnt", "burnt"),
    ("buy", "bought", "bought"),
    ("choose", "chose", "chosen"),
    ("come", "came", "come"),
    ("cost", "cost", "cost"),
    ("cut", "cut", "cut"),
    ("deal", "dealt", "dealt"),
    ("do", "did", "done"),
    ("drink", "drank", "drunk"),
    ("drive", "drove", "driven"),
    ("eat", "ate", "eaten"),
    ("fall", "fell", "fallen"),
    ("feed", "fed", "fed"),
    ("feel", "felt", "felt"),
    ("fight", "fought", "fought"),
    ("find", "found", "found"),
    ("forbid", "forbade", "forbidden"),
    ("forget", "forgot", "forgotten"),
    ("forgive", "forgave", "forgiven"),
    ("get", "got", "gotten"),
    ("give", "gave", "given"),
    ("go", "went", "gone"),
    ("grow", "grew", "grown"),
    ("hang", "hung", "hung"),
    ("have", "had", "had"),
    ("hear", "heard", "heard"),
    ("hide", "hid", "hidden"),
    ("hit", "hit", "hit"),
    ("hold", "held", "held"),
    ("hurt", "hurt", "hurt"),
    ("keep", "kept", "kept"),
    ("know", "knew", "known"),
    ("lead", "led", "led"),
    ("leave", "left", "left"),
    ("lend", "lent", "lent"),
    ("let", "let", "let"),
    ("lie", "lied", "lied"),
    ("lose", "lost", "lost"),
    ("make", "made", "made"),
    ("mean", "meant", "meant"),
    ("meet", "met", "met"),
    ("pay", "paid", "paid"),
    ("put", "put", "put"),
    ("quit", "quit", "quit"),
    ("read", "read", "read"),
    ("run", "ran", "run"),
    ("say", "said", "said"),
    ("see", "saw", "seen"),
    ("sell", "sold", "sold"),
    ("send", "sent", "sent"),
    ("sing", "sang", "sung"),
    ("sit", "sat", "sat"),
    ("sleep", "slept", "slept"),
    ("speak", "spoke", "spoken"),
    ("spend", "spent", "spent"),
    ("split", "split", "split"),
    ("steal", "stole", "stolen"),
    ("swear", "swore", "sworn"),
    ("take", "took", "taken"),
    ("teach", "taught", "taught"),
    ("tell", "told", "told"),
    ("think", "thought", "thought"),
    ("throw", "threw", "thrown"),
    ("understand", "understood", "understood"),
    ("upset", "upset", "upset"),
    ("wake", "woke", "woken"),
    ("wear", "wore", "worn"),
    ("win", "won", "won"),
    ("write", "wrote", "written"),
];

const ADJECTIVES: &[&str] = &[
    "afraid", "aggressive", "alone", "amazing", "angry", "annoyed", "annoying", "anxious",
    "arrogant", "ashamed", "awful", "awkward", "bad", "beautiful", "best", "better", "big",
    "bitter", "bored", "brave", "busy", "calm", "careful", "careless", "cheap", "clean",
    "clear", "close", "cold", "confused", "controlling", "cool", "crazy", "cruel", "cute",
    "dead", "difficult", "dirty", "disappointed", "disgusting", "drunk", "dumb", "early",
    "easy", "embarrassed", "empty", "engaged", "entitled", "envious", "evil", "excited",
    "expensive", "fair", "fake", "familiar", "famous", "fat", "fine", "first", "free",
    "friendly", "frustrated", "full", "funny", "generous", "gentle", "glad", "good", "great",
    "greedy", "grumpy", "guilty", "happy", "hard", "harsh", "helpful", "honest", "hostile",
    "huge", "hungry", "hurt", "important", "impossible", "innocent", "jealous", "kind",
    "lame", "last", "late", "lazy", "little", "lonely", "long", "loud", "lovely", "loyal",
    "lucky", "mad", "married", "mean", "messy", "mild", "miserable", "mutual", "nasty",
    "naughty", "nervous", "new", "nice", "normal", "obvious", "okay", "old", "open", "other",
    "patient", "perfect", "petty", "pissed", "polite", "poor", "possible", "pregnant",
    "pretty", "private", "proud", "quiet", "ready", "real", "reasonable", "responsible",
    "rich", "ridiculous", "right", "rude", "sad", "safe", "same", "scared", "selfish",
    "sensitive", "serious", "short", "sick", "silly", "small", "smart", "sorry", "special",
    "strange", "strict", "strong", "stubborn", "stupid", "sure", "sweet", "terrible",
    "thankful", "tired", "toxic", "true", "ugly", "unfair", "unhappy", "upset", "useless",
    "weird", "whole", "wise", "wonderful", "worried", "worse", "worst", "wrong", "young",
];

const ADVERBS: &[&str] = &[
    "again", "ago", "almost", "already", "also", "altogether", "always", "anymore", "anyway", "apparently",
    "away", "back", "basically", "certainly", "clearly", "constantly", "definitely", "else",
    "especially", "even", "eventually", "ever", "exactly", "finally", "here", "honestly",
    "immediately", "instead", "just", "later", "literally", "maybe", "much", "never", "now",
    "obviously", "often", "once", "only", "perhaps", "probably", "quite", "rather", "really",
    "recently", "seriously", "simply", "so", "sometimes", "soon", "still", "suddenly",
    "then", "there", "today", "together", "tomorrow", "tonight", "too", "totally", "twice",
    "usually", "very", "yesterday", "absolutely", "actually", "completely", "barely",
];

const PERSON_NOUNS: &[&str] = &[
    "aunt", "baby", "bf", "boss", "boy", "boyfriend", "bride", "brother", "child", "children",
    "classmate", "colleague", "cousin", "coworker", "dad", "daughter", "ex", "family",
    "father", "fiance", "fiancee", "friend", "gf", "girl", "girlfriend", "grandma",
    "grandmother", "grandpa", "grandfather", "groom", "guest", "guy", "husband", "kid",
    "landlord", "man", "manager", "mom", "mother", "mum", "neighbor", "nephew", "niece",
    "parent", "partner", "people", "person", "roommate", "sibling", "sister", "son",
    "stepdad", "stepmom", "student", "teacher", "uncle", "wife", "woman", "mil", "fil",
    "sil", "bil", "stranger", "teammate",
];

pub const NEGATION_WORDS: &[&str] = &["not", "n't", "never"];

pub const FIRST_PERSON_SINGULAR: &[&str] = &["i", "me", "my", "mine", "myself"];

pub const PERSONAL_PRONOUNS: &[&str] = &[
    "i", "me", "myself", "mine", "you", "yourself", "he", "him", "himself", "she", "her",
    "herself", "we", "us", "ourselves", "they", "them", "themselves", "yours", "hers", "ours",
    "theirs",
];

pub const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they"];

pub const PRONOUNS: &[&str] = &[
    "i", "me", "myself", "mine", "you", "yourself", "yourselves", "yours", "he", "him",
    "himself", "she", "herself", "hers", "it", "itself", "we", "us", "ourselves", "ours",
    "they", "them", "themselves", "theirs", "someone", "somebody", "everyone", "everybody",
    "anyone", "anybody", "nobody", "noone", "something", "nothing", "everything", "anything",
    "who", "whom", "what", "one",
];

pub const POSSESSIVE_DETERMINERS: &[&str] = &["my", "your", "his", "her", "its", "our", "their"];

pub const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "some", "any", "no", "every", "each",
    "all", "both", "another", "either", "neither", "few", "many", "several", "such",
];

pub const PREPOSITIONS: &[&str] = &[
    "about", "above", "across", "after", "against", "along", "among", "around", "at",
    "before", "behind", "below", "beside", "between", "by", "down", "during", "except", "for",
    "from", "in", "inside", "into", "like", "near", "of", "off", "on", "onto", "out",
    "outside", "over", "past", "since", "through", "throughout", "toward", "towards", "under",
    "until", "up", "upon", "with", "within", "without",
];

pub const COORDINATORS: &[&str] = &["and", "or", "but", "nor", "yet"];

pub const SUBORDINATORS: &[&str] = &[
    "because", "although", "though", "while", "if", "when", "whenever", "unless", "whether",
    "as", "once", "that", "so", "cause", "since", "after", "before", "until", "where",
];

pub const MODALS: &[&str] = &[
    "can", "could", "will", "would", "shall", "should", "may", "might", "must", "ca", "wo",
    "'ll", "'d",
];

pub const BE_FORMS: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "'m", "'re",
];

pub const HAVE_FORMS: &[&str] = &["have", "has", "had", "having", "'ve"];

pub const DO_FORMS: &[&str] = &["do", "does", "did"];

pub const INTERJECTIONS: &[&str] = &[
    "yes", "yeah", "oh", "wow", "ok", "okay", "hey", "please", "thanks", "lol", "ugh", "well",
    "hi", "hello", "nope", "yep",
];

const NUMBER_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "twenty", "thirty", "hundred", "thousand", "first", "second", "third",
];

/// Placeholder tokens used by commonsense event snippets.
pub const PLACEHOLDERS: &[&str] = &["personx", "persony", "personz"];

struct Tables {
    verbs: HashSet<&'static str>,
    past: HashMap<&'static str, &'static str>,
    participle: HashMap<&'static str, &'static str>,
    irregular_lemmas: HashSet<&'static str>,
    adjectives: HashSet<&'static str>,
    adverbs: HashSet<&'static str>,
    person_nouns: HashSet<&'static str>,
    numbers: HashSet<&'static str>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut past = HashMap::new();
        let mut participle = HashMap::new();
        let mut irregular_lemmas = HashSet::new();
        for &(lemma, p, pp) in IRREGULAR {
            past.insert(p, lemma);
            participle.insert(pp, lemma);
            irregular_lemmas.insert(lemma);
        }
        Tables {
            verbs: VERBS.iter().copied().collect(),
            past,
            participle,
            irregular_lemmas,
            adjectives: ADJECTIVES.iter().copied().collect(),
            adverbs: ADVERBS.iter().copied().collect(),
            person_nouns: PERSON_NOUNS.iter().copied().collect(),
            numbers: NUMBER_WORDS.iter().copied().collect(),
        }
    })
}

pub fn is_adjective(word: &str) -> bool {
    tables().adjectives.contains(word)
}

pub fn is_listed_adverb(word: &str) -> bool {
    tables().adverbs.contains(word)
}

pub fn is_person_noun(word: &str) -> bool {
    let t = tables();
    t.person_nouns.contains(word) || t.person_nouns.contains(noun_lemma(word).as_str())
}

pub fn is_number(word: &str) -> bool {
    word.chars().all(|c| c.is_ascii_digit()) || tables().numbers.contains(word)
}

pub fn is_verb_lemma(word: &str) -> bool {
    tables().verbs.contains(word)
}

/// Analyse a lowercased surface form as a verb of the lexicon. Returns the
/// lemma and the most likely inflection; past and participle are ambiguous
/// for regular verbs and are reported as `Past`.
pub fn analyze_verb(word: &str) -> Option<(String, VerbForm)> {
    let t = tables();
    if t.verbs.contains(word) {
        return Some((word.to_string(), VerbForm::Base));
    }
    if let Some(lemma) = t.past.get(word) {
        if t.participle.get(word) == Some(lemma) {
            return Some((lemma.to_string(), VerbForm::Past));
        }
        return Some((lemma.to_string(), VerbForm::Past));
    }
    if let Some(lemma) = t.participle.get(word) {
        return Some((lemma.to_string(), VerbForm::PastParticiple));
    }
    let known = |stem: &str| t.verbs.contains(stem) || t.irregular_lemmas.contains(stem);
    if let Some(stem) = word.strip_suffix("ing") {
        for cand in stem_candidates(stem) {
            if known(&cand) {
                return Some((cand, VerbForm::Gerund));
            }
        }
        if let Some(s) = stem.strip_suffix('y') {
            // lying, dying
            let cand = format!("{s}ie");
            if known(&cand) {
                return Some((cand, VerbForm::Gerund));
            }
        }
    }
    if let Some(stem) = word.strip_suffix("ied") {
        let cand = format!("{stem}y");
        if known(&cand) {
            return Some((cand, VerbForm::Past));
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        for cand in stem_candidates(stem) {
            if known(&cand) && !t.irregular_lemmas.contains(cand.as_str()) {
                return Some((cand, VerbForm::Past));
            }
        }
    }
    if let Some(stem) = word.strip_suffix("ies") {
        let cand = format!("{stem}y");
        if known(&cand) {
            return Some((cand, VerbForm::Present3));
        }
    }
    if let Some(stem) = word.strip_suffix("es") {
        if known(stem) {
            return Some((stem.to_string(), VerbForm::Present3));
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        if known(stem) {
            return Some((stem.to_string(), VerbForm::Present3));
        }
    }
    match word {
        "has" => Some(("have".into(), VerbForm::Present3)),
        "does" => Some(("do".into(), VerbForm::Present3)),
        "goes" => Some(("go".into(), VerbForm::Present3)),
        _ => None,
    }
}

fn stem_candidates(stem: &str) -> Vec<String> {
    let mut out = vec![stem.to_string(), format!("{stem}e")];
    let b = stem.as_bytes();
    if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
        out.push(stem[..stem.len() - 1].to_string());
    }
    out
}

/// Lemma for a verb-like token that is not in the lexicon, by stripping
/// regular suffixes.
pub fn guess_verb_lemma(word: &str) -> (String, VerbForm) {
    if let Some(s) = word.strip_suffix("ied") {
        return (format!("{s}y"), VerbForm::Past);
    }
    if let Some(s) = word.strip_suffix("ed") {
        let b = s.as_bytes();
        if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] && !s.ends_with("ss") {
            return (s[..s.len() - 1].to_string(), VerbForm::Past);
        }
        return (s.to_string(), VerbForm::Past);
    }
    if let Some(s) = word.strip_suffix("ing") {
        return (s.to_string(), VerbForm::Gerund);
    }
    if let Some(s) = word.strip_suffix("ies") {
        return (format!("{s}y"), VerbForm::Present3);
    }
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") {
        return (word[..word.len() - 1].to_string(), VerbForm::Present3);
    }
    (word.to_string(), VerbForm::Base)
}

pub fn noun_lemma(word: &str) -> String {
    match word {
        "children" => return "child".into(),
        "people" => return "person".into(),
        "men" => return "man".into(),
        "women" => return "woman".into(),
        _ => {}
    }
    if word.len() > 4 {
        if let Some(s) = word.strip_suffix("ies") {
            return format!("{s}y");
        }
    }
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

/// Lemma of a word regardless of its syntactic role, preferring the verb
/// reading. Used by lexicon lookups and overlap scorers that work on bags of
/// words rather than parses.
pub fn lemma(word: &str) -> String {
    let w = word.to_lowercase();
    if let Some(l) = aux_lemma(&w) {
        return l.to_string();
    }
    if let Some((l, _)) = analyze_verb(&w) {
        return l;
    }
    if is_adjective(&w) || is_listed_adverb(&w) || PRONOUNS.contains(&w.as_str()) {
        return w;
    }
    noun_lemma(&w)
}

pub fn aux_lemma(word: &str) -> Option<&'static str> {
    if BE_FORMS.contains(&word) {
        return Some("be");
    }
    if HAVE_FORMS.contains(&word) {
        return Some("have");
    }
    if DO_FORMS.contains(&word) {
        return Some("do");
    }
    match word {
        "ca" => Some("can"),
        "wo" | "'ll" => Some("will"),
        "'d" => Some("would"),
        "n't" => Some("not"),
        _ if MODALS.contains(&word) => Some(match word {
            "can" => "can",
            "could" => "could",
            "will" => "will",
            "would" => "would",
            "shall" => "shall",
            "should" => "should",
            "may" => "may",
            "might" => "might",
            _ => "must",
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_and_irregular_forms() {
        assert_eq!(analyze_verb("abandons"), Some(("abandon".into(), VerbForm::Present3)));
        assert_eq!(analyze_verb("pushed"), Some(("push".into(), VerbForm::Past)));
        assert_eq!(analyze_verb("told"), Some(("tell".into(), VerbForm::Past)));
        assert_eq!(analyze_verb("taken"), Some(("take".into(), VerbForm::PastParticiple)));
        assert_eq!(analyze_verb("calling"), Some(("call".into(), VerbForm::Gerund)));
        assert_eq!(analyze_verb("stopped"), Some(("stop".into(), VerbForm::Past)));
        assert_eq!(analyze_verb("lying"), Some(("lie".into(), VerbForm::Gerund)));
        assert_eq!(analyze_verb("tries"), Some(("try".into(), VerbForm::Present3)));
        assert_eq!(analyze_verb("engaged"), Some(("engage".into(), VerbForm::Past)));
        assert_eq!(analyze_verb("got"), Some(("get".into(), VerbForm::Past)));
        assert_eq!(analyze_verb("gets"), Some(("get".into(), VerbForm::Present3)));
        assert_eq!(analyze_verb("table"), None);
    }

    #[test]
    fn bag_of_words_lemmas() {
        assert_eq!(lemma("Got"), "get");
        assert_eq!(lemma("brothers"), "brother");
        assert_eq!(lemma("was"), "be");
        assert_eq!(lemma("happy"), "happy");
    }
}
