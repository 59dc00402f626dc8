/// Common English words, sorted for binary search.
pub const COMMON_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "almost", "also", "always",
    "am", "an", "and", "another", "any", "anyone", "anything", "are", "area", "around", "as",
    "ask", "at", "away", "back", "be", "because", "been", "before", "being", "below", "best",
    "better", "between", "big", "both", "but", "by", "call", "came", "can", "can't", "cannot",
    "child", "children", "come", "could", "couldn't", "day", "did", "didn't", "do", "does",
    "doesn't", "doing", "don't", "done", "down", "during", "each", "early", "end", "enough",
    "even", "ever", "every", "everyone", "everything", "eye", "face", "far", "feel", "few",
    "find", "first", "for", "found", "from", "get", "give", "go", "going", "good", "got",
    "great", "had", "hand", "has", "have", "he", "head", "hear", "heard", "hello", "help",
    "her", "here", "hers", "herself", "hey", "hi", "him", "himself", "his", "home", "house",
    "how", "hurt", "hurts", "i", "i'm", "if", "in", "inside", "into", "is", "isn't", "it",
    "it's", "its", "just", "keep", "kind", "know", "last", "leave", "left", "let", "life",
    "like", "little", "long", "look", "made", "make", "man", "many", "may", "me", "might",
    "mine", "more", "most", "mother", "much", "must", "my", "myself", "name", "near", "need",
    "never", "new", "next", "night", "no", "nobody", "none", "nor", "not", "nothing", "now",
    "of", "off", "often", "oh", "ok", "okay", "old", "on", "once", "one", "only", "or",
    "other", "our", "out", "over", "own", "people", "person", "place", "please", "put",
    "quite", "really", "right", "room", "said", "same", "saw", "say", "see", "seem", "she",
    "should", "side", "since", "small", "so", "some", "someone", "something", "soon", "still",
    "stop", "such", "sure", "take", "tell", "than", "thank", "thanks", "that", "that's", "the",
    "their", "them", "then", "there", "these", "they", "thing", "think", "this", "those",
    "though", "through", "time", "to", "today", "together", "too", "trapped", "two", "under",
    "until", "up", "upon", "us", "very", "wait", "want", "was", "water", "way", "we", "well",
    "went", "were", "what", "when", "where", "which", "while", "who", "why", "will", "with",
    "without", "woman", "won't", "work", "would", "yes", "yet", "you", "you're", "your",
    "yours",
];
