"""Lovins (1968) stemmer, applied iteratively until the stem stops changing.

Longest-match removal of one ending from a fixed list, guarded by a context
condition on the remaining stem, followed by the recoding rules that tidy
up stem endings.
"""
from __future__ import annotations

from functools import lru_cache

MAX_ITERATIONS = 10

# ending -> condition code, grouped by ending length
_ENDINGS_SPEC = """
alistically B arizability A izationally B
antialness A arisations A arizations A entialness A
allically C antaneous A antiality A arisation A arization A ationally B
ativeness A eableness E entations A entiality A entialize A entiation A
ionalness A istically A itousness A izability A izational A
ableness A arizable A entation A entially A eousness A ibleness A
icalness A ionalism A ionality A ionalize A iousness A izations A lessness A
ability A aically A alistic B alities A ariness E aristic A arizing A
ateness A atingly A ational B atively A ativism A elihood E encible A
entally A entials A entiate A entness A fulness A ibility A icalism A
icalist A icality A icalize A ication G icianry A ination A ingness A
ionally A isation A ishness A istical A iteness A iveness A ivistic A
ivities A ization F izement A oidally A ousness A
aceous A acious B action G alness A ancial A ancies A ancing B ariser A
arized A arizer A atable A ations B atives A eature Z efully A encies A
encing A ential A enting C entist A eously A ialist A iality A ialize A
ically A icance A icians A icists A ifully A ionals A ionate D ioning A
ionist A iously A istics A izable E lessly A nesses A oidism A
acies A acity A aging B aical A alist A alism B ality A alize A allic BB
anced B ances B antic C arial A aries A arily A arity B arize A aroid A
ately A ating I ation B ative A ators A atory A ature E early Y ehood A
eless A elity A ement A enced A ences A eness E ening E ental A ented C
ently A fully A ially A icant A ician A icide A icism A icist A icity A
idine I iedly A ihood A inate A iness A ingly B inism J inity CC ional A
ioned A ished A istic A ities A itous A ively A ivity A izers F izing F
oidal A oides A otide A ously A
able A ably A ages B ally B ance B ancy B ants B aric A arly K ated I
ates A atic B ator A ealy Y edly E eful A eity A ence A ency A ened E
enly E eous A hood A ials A ians A ible A ibly A ical A ides L iers A
iful A ines M ings N ions B ious A isms B ists A itic H ized F izer F
less A lily A ness A ogen A ward A wise A ying B yish A
acy A age B aic A als BB ant B ars O ary F ata A ate A eal Y ear Y ely E
ene E ent C ery E ese A ful A ial A ian A ics A ide L ied A ier A ies P
ily A ine M ing N ion Q ish C ism B ist A ite AA ity A ium A ive A ize F
oid A one R ous A
ae A al BB ar X as B ed E en F es E ia A ic A is A ly B on S or T um U
us V yl R 's A s' A
a A e A i A o A s W y B
"""


def _parse_endings(spec: str) -> dict[str, str]:
    words = spec.split()
    return dict(zip(words[0::2], words[1::2]))


ENDINGS = _parse_endings(_ENDINGS_SPEC)
_MAX_ENDING = max(len(e) for e in ENDINGS)


def _condition(code: str, stem: str) -> bool:
    n = len(stem)
    last = stem[-1:]
    if code == "A":
        return True
    if code == "B":
        return n >= 3
    if code == "C":
        return n >= 4
    if code == "D":
        return n >= 5
    if code == "E":
        return last != "e"
    if code == "F":
        return n >= 3 and last != "e"
    if code == "G":
        return n >= 3 and last == "f"
    if code == "H":
        return last == "t" or stem.endswith("ll")
    if code == "I":
        return last not in ("o", "e")
    if code == "J":
        return last not in ("a", "e")
    if code == "K":
        return n >= 3 and (last in ("l", "i") or (n >= 3 and stem[-3] == "u" and last == "e"))
    if code == "L":
        if last in ("u", "x"):
            return False
        if last == "s":
            return stem.endswith("os")
        return True
    if code == "M":
        return last not in ("a", "c", "e", "m")
    if code == "N":
        if n >= 3 and stem[-3] == "s":
            return n >= 4
        return n >= 3
    if code == "O":
        return last in ("l", "i")
    if code == "P":
        return last != "c"
    if code == "Q":
        return n >= 3 and last not in ("l", "n")
    if code == "R":
        return last in ("n", "r")
    if code == "S":
        return stem.endswith("dr") or (last == "t" and not stem.endswith("tt"))
    if code == "T":
        return last == "s" or (last == "t" and not stem.endswith("ot"))
    if code == "U":
        return last in ("l", "m", "n", "r")
    if code == "V":
        return last == "c"
    if code == "W":
        return last not in ("s", "u")
    if code == "X":
        return last in ("l", "i") or (n >= 3 and stem[-3] == "u" and last == "e")
    if code == "Y":
        return stem.endswith("in")
    if code == "Z":
        return last != "f"
    if code == "AA":
        return last in ("d", "f", "l", "t") or stem.endswith(("ph", "th", "er", "or", "es"))
    if code == "BB":
        return n >= 3 and not stem.endswith(("met", "ryst"))
    if code == "CC":
        return last == "l"
    raise ValueError(f"unknown condition {code!r}")


def remove_ending(word: str) -> str:
    """Strip the longest ending whose condition holds, keeping a stem of >= 2 letters."""
    for size in range(min(_MAX_ENDING, len(word) - 2), 0, -1):
        ending = word[-size:]
        code = ENDINGS.get(ending)
        if code is not None:
            stem = word[:-size]
            if _condition(code, stem):
                return stem
    return word


_UNDOUBLE = ("bb", "dd", "gg", "ll", "mm", "nn", "pp", "rr", "ss", "tt")

# (suffix, replacement, letters that block the rule when they precede the suffix)
_RECODE = (
    ("iev", "ief", ""),
    ("uct", "uc", ""),
    ("umpt", "um", ""),
    ("rpt", "rb", ""),
    ("urs", "ur", ""),
    ("istr", "ister", ""),
    ("metr", "meter", ""),
    ("olv", "olut", ""),
    ("ul", "l", "aoi"),
    ("bex", "bic", ""),
    ("dex", "dic", ""),
    ("pex", "pic", ""),
    ("tex", "tic", ""),
    ("ax", "ac", ""),
    ("ex", "ec", ""),
    ("ix", "ic", ""),
    ("lux", "luc", ""),
    ("uad", "uas", ""),
    ("vad", "vas", ""),
    ("cid", "cis", ""),
    ("lid", "lis", ""),
    ("erid", "eris", ""),
    ("pand", "pans", ""),
    ("end", "ens", "s"),
    ("ond", "ons", ""),
    ("lud", "lus", ""),
    ("rud", "rus", ""),
    ("her", "hes", "pt"),
    ("mit", "mis", ""),
    ("ent", "ens", "m"),
    ("ert", "ers", ""),
    ("et", "es", "n"),
    ("yt", "ys", ""),
    ("yz", "ys", ""),
)


def recode(stem: str) -> str:
    """Undouble a final consonant pair, then apply the first matching recoding rule."""
    if stem.endswith(_UNDOUBLE):
        stem = stem[:-1]
    for suffix, replacement, blockers in _RECODE:
        if stem.endswith(suffix):
            before = stem[-len(suffix) - 1: -len(suffix)]
            if before and before in blockers:
                continue
            return stem[: -len(suffix)] + replacement
    return stem


def lovins_stem_once(word: str) -> str:
    if len(word) <= 2:
        return word
    return recode(remove_ending(word))


@lru_cache(maxsize=65536)
def lovins_stem(token: str) -> str:
    """Iterated Lovins stem of a lower-case alphabetic token.

    Non-alphabetic tokens are returned unchanged.

    >>> lovins_stem("cat")
    'cat'
    """
    if not token.isalpha() or not token.isascii():
        return token
    word = token
    for _ in range(MAX_ITERATIONS):
        nxt = lovins_stem_once(word)
        if nxt == word:
            break
        word = nxt
    return word
