"""Shipped closed-class word lists and the POS inventory.

TAGSET is the 14-label universal POS inventory used for all SYN
constraints. TAG_LEXICON backs the fallback lookup tagger: function words
carry their class, a small set of very frequent content words is included
so short samples get useful tags, and everything else defaults to NOUN.
FUNCTION_WORDS is the stoplist for the function-word classifier and for
tf-idf vocabulary filtering.
"""

from __future__ import annotations

TAGSET: tuple[str, ...] = (
    "ADJ", "ADP", "ADV", "AUX", "CONJ", "DET", "NOUN",
    "NUM", "PART", "PRON", "PROPN", "PUNCT", "VERB", "X",
)

TAG_TO_ID: dict[str, int] = {t: i for i, t in enumerate(TAGSET)}

DEFAULT_TAG = "NOUN"

_DETERMINERS = (
    "the", "a", "an", "this", "that", "these", "those", "each", "every",
    "either", "neither", "some", "any", "no", "all", "both", "half",
    "another", "such", "what", "which", "whose",
)

_PRONOUNS = (
    "i", "me", "my", "mine", "myself", "we", "us", "our", "ours",
    "ourselves", "you", "your", "yours", "yourself", "yourselves", "ur",
    "he", "him", "his", "himself", "she", "her", "hers", "herself", "it",
    "its", "itself", "they", "them", "their", "theirs", "themselves",
    "who", "whom", "whoever", "someone", "somebody", "something", "anyone",
    "anybody", "anything", "everyone", "everybody", "everything", "nobody",
    "nothing", "none", "one", "ones", "other", "others",
)

_PREPOSITIONS = (
    "of", "in", "on", "at", "by", "for", "with", "about", "against",
    "between", "among", "into", "through", "during", "before", "after",
    "above", "below", "from", "up", "down", "out", "off", "over", "under",
    "again", "near", "across", "behind", "beyond", "around", "along",
    "upon", "within", "without", "toward", "towards", "onto", "inside",
    "outside", "beside", "besides", "despite", "except", "per", "since",
    "until", "till", "via", "amid", "than", "as",
)

_CONJUNCTIONS = (
    "and", "or", "but", "nor", "so", "yet", "because", "although",
    "though", "while", "whereas", "if", "unless", "whether", "once",
    "when", "whenever", "where", "wherever", "why", "how",
)

_AUXILIARIES = (
    "am", "is", "are", "was", "were", "be", "been", "being",
    "do", "does", "did", "done", "doing",
    "have", "has", "had", "having",
    "will", "would", "shall", "should", "can", "could", "may", "might",
    "must", "ought", "dare",
    "isn't", "aren't", "wasn't", "weren't", "don't", "doesn't", "didn't",
    "haven't", "hasn't", "hadn't", "won't", "wouldn't", "shan't",
    "shouldn't", "can't", "cannot", "couldn't", "mayn't", "mightn't",
    "mustn't", "ain't",
)

_PARTICLES = ("to", "not", "n't", "'s", "'ll", "'ve", "'re", "'d", "'m")

_ADVERBS = (
    "very", "too", "quite", "rather", "really", "just", "only", "even",
    "still", "also", "then", "there", "here", "now", "never", "always",
    "often", "sometimes", "usually", "already", "soon", "almost", "enough",
    "perhaps", "maybe", "however", "therefore", "instead", "anyway",
    "again", "away", "back", "else", "ever", "far", "more", "most", "much",
    "less", "least", "well", "yes", "yeah",
)

_NUMERALS = (
    "zero", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "first", "second", "third", "hundred", "thousand",
    "million", "billion", "many", "few", "several",
)

FUNCTION_WORDS: tuple[str, ...] = tuple(sorted(set(
    _DETERMINERS + _PRONOUNS + _PREPOSITIONS + _CONJUNCTIONS
    + _AUXILIARIES + _PARTICLES + _ADVERBS + _NUMERALS
)))

# Frequent open-class words included so the fallback tagger produces
# informative tags on short texts; everything unlisted defaults to NOUN.
_COMMON_VERBS = (
    "go", "goes", "going", "gone", "went", "get", "got", "gets", "make",
    "made", "know", "knew", "think", "thought", "take", "took", "see",
    "saw", "seen", "come", "came", "want", "wanted", "look", "looked",
    "use", "used", "find", "found", "give", "gave", "tell", "told",
    "work", "worked", "call", "called", "try", "tried", "ask", "asked",
    "need", "needed", "feel", "felt", "leave", "left", "put", "keep",
    "kept", "let", "begin", "began", "show", "showed", "hear", "heard",
    "play", "played", "run", "ran", "move", "moved", "live", "lived",
    "believe", "bring", "brought", "happen", "happened", "write", "wrote",
    "sit", "sat", "stand", "stood", "lose", "lost", "pay", "paid", "meet",
    "met", "set", "shut", "open", "opened", "close", "closed", "wait",
    "waited", "focus", "stop", "stopped", "stay", "stayed", "hope",
    "hoped", "sleep", "slept", "eat", "ate", "drink", "drank", "read",
    "speak", "spoke", "say", "said", "says", "love", "loved", "like",
    "liked", "watch", "watched", "walk", "walked", "talk", "talked",
    "turn", "turned", "start", "started", "help", "helped", "allow",
    "allowed", "allowing", "force", "forced", "forcing", "compare",
    "compared",
)

_COMMON_ADJECTIVES = (
    "good", "new", "old", "great", "big", "small", "large", "long",
    "short", "high", "low", "young", "early", "late", "hard", "easy",
    "free", "full", "hot", "cold", "warm", "red", "blue", "green",
    "black", "white", "happy", "sad", "bad", "best", "better", "worse",
    "worst", "right", "wrong", "true", "false", "real", "sure", "mad",
    "awesome", "nice", "fine", "own", "same", "different", "important",
    "next", "last", "ready", "open", "busy",
)

TAG_LEXICON: dict[str, str] = {}
for _w in _DETERMINERS:
    TAG_LEXICON[_w] = "DET"
for _w in _PRONOUNS:
    TAG_LEXICON[_w] = "PRON"
for _w in _PREPOSITIONS:
    TAG_LEXICON[_w] = "ADP"
for _w in _CONJUNCTIONS:
    TAG_LEXICON[_w] = "CONJ"
for _w in _AUXILIARIES:
    TAG_LEXICON[_w] = "AUX"
for _w in _PARTICLES:
    TAG_LEXICON[_w] = "PART"
for _w in _ADVERBS:
    TAG_LEXICON[_w] = "ADV"
for _w in _NUMERALS:
    TAG_LEXICON[_w] = "NUM"
for _w in _COMMON_VERBS:
    TAG_LEXICON[_w] = "VERB"
for _w in _COMMON_ADJECTIVES:
    TAG_LEXICON.setdefault(_w, "ADJ")
for _w in ".,!?;:\"'()[]":
    TAG_LEXICON[_w] = "PUNCT"

# "to" and "that" style overlaps are resolved by the assignment order
# above (later categories do not overwrite earlier ones for ADJ only);
# a handful of words get an explicit final say:
TAG_LEXICON["to"] = "PART"
TAG_LEXICON["that"] = "DET"
TAG_LEXICON["open"] = "VERB"
TAG_LEXICON["one"] = "NUM"
