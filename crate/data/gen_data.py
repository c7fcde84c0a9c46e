"""Generates the bundled fixtures and the synthetic mini-corpus.

Ground truth (expected verdicts, expected filter counts) is written by hand or
computed here from the generation design, never by running the toolkit.
Run from the repository root: python3 data/gen_data.py
"""
import os
import json
import random
import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent
FIX = ROOT / "fixtures"
MINI = ROOT / "mini"

# ---------------------------------------------------------------- verdicts

VERDICT_CASES = [
    # YTA phrase variants
    ("YTA", "YTA. You should have told her first."),
    ("YTA", "yta, and honestly it is not close."),
    ("YTA", "You're the asshole here, sorry."),
    ("YTA", "You are the a-hole for reading her diary."),
    ("YTA", "You're definitely the asshole in this story."),
    ("YTA", "YWBTA if you skip the wedding."),
    ("YTA", "You would be the asshole if you did that."),
    ("YTA", "Yta for sure. Apologize to your brother."),
    ("YTA", "Honestly YTA."),
    ("YTA", "I hate to say it but YTA."),
    ("YTA", "Not gonna lie, YTA."),
    ("YTA", "Not sure why everyone is defending you. YTA."),
    # NTA phrase variants
    ("NTA", "NTA. Your sister was out of line."),
    ("NTA", "nta, she owes you an apology."),
    ("NTA", "Not the asshole at all."),
    ("NTA", "You're not the asshole here."),
    ("NTA", "YWNBTA, stand your ground."),
    ("NTA", "You wouldn't be the asshole for saying no."),
    ("NTA", "Definitely NTA, your house your rules."),
    ("NTA", "NTA!!! Block him."),
    ("NTA", "NTA and your mom needs to back off."),
    ("NTA", "You are not an asshole for wanting privacy."),
    ("NTA", "NTA. Also happy birthday to your kid."),
    ("NTA", "Not the a-hole. He should pay."),
    # ESH
    ("ESH", "ESH. Both of you acted badly."),
    ("ESH", "Everyone sucks here, honestly."),
    ("ESH", "everybody sucks in this story."),
    ("ESH", "ESH, you and your roommate both."),
    ("ESH", "Esh but mostly your brother."),
    ("ESH", "I think everyone sucks here."),
    ("ESH", "Honestly ESH."),
    ("ESH", "ESH. Nobody handled this well."),
    # NAH
    ("NAH", "NAH. Just talk to her."),
    ("NAH", "No assholes here, just bad communication."),
    ("NAH", "Nobody's the asshole, it is a tough spot."),
    ("NAH", "NAH, you both have fair points."),
    ("NAH", "nah, it is a misunderstanding."),
    ("NAH", "Nobody is the asshole here."),
    ("NAH", "NAH honestly, families are hard."),
    ("NAH", "I would say NAH."),
    # INFO
    ("INFO", "INFO: did you tell her beforehand?"),
    ("INFO", "Need more info before judging."),
    ("INFO", "Not enough info to judge."),
    ("INFO", "INFO - how old is your son?"),
    ("INFO", "Needs more information about the money."),
    ("INFO", "info, what did your husband say?"),
    ("INFO", "Honestly INFO. What happened next?"),
    ("INFO", "We need more info here."),
    # negation reversal
    ("NTA", "I do not think YTA"),
    ("NTA", "I don't think YTA here."),
    ("NTA", "I would never say YTA over this."),
    ("YTA", "I do not think NTA, sorry."),
    ("NTA", "You are not the asshole."),
    ("YTA", "I can't say NTA this time."),
    # transition override
    ("NTA", "YTA at first glance but honestly NTA"),
    ("NTA", "I wanted to say YTA, but NTA after the edit."),
    ("YTA", "NTA at first, however YTA once you mentioned the money."),
    ("NAH", "ESH, though NAH is fair too."),
    ("NTA", "Edit: changed to NTA. Originally YTA."),
    ("NTA", "Leaning YTA, but after reading your comments NTA."),
]


def write_verdicts():
    assert len(VERDICT_CASES) == 60
    with open(FIX / "verdict_cases.tsv", "w") as f:
        f.write("expected\ttext\n")
        for code, text in VERDICT_CASES:
            f.write(f"{code}\t{text}\n")


# ------------------------------------------------------- 200-record corpus

# filler vocabulary free of verdict phrases and quote markers
FILLER = ("the story has many details about family plans and money and time spent "
          "with friends over several long weekends at home in town").split()


def filler(rng, n):
    return " ".join(rng.choice(FILLER) for _ in range(n))


def words(text):
    out = []
    for tok in text.split():
        tok = re.sub(r"^[^0-9A-Za-z]+|[^0-9A-Za-z]+$", "", tok)
        if tok:
            out.append(tok)
    return out


def has_quote(body):
    return any(re.match(r"^\s*(>|&gt;)", line) for line in body.split("\n"))


def write_corpus200():
    rng = random.Random(200)
    posts, comments = [], []
    # each post: (words, deleted, moderator, top-level plan)
    post_specs = [
        (80, False, False, 12), (50, False, False, 10), (49, False, False, 12),
        (120, False, False, 9), (60, True, False, 15), (70, False, True, 15),
        (90, False, False, 14), (55, False, False, 11), (65, False, False, 10),
        (100, False, False, 20), (75, False, False, 13), (58, False, False, 10),
    ]
    cid = 0
    truth = {"posts": [], "comments": []}
    for k, (nw, deleted, moderator, n_top) in enumerate(post_specs):
        pid = f"p{k:02d}"
        body = filler(rng, nw)
        if deleted and k % 2 == 0:
            body = "[deleted]"
        posts.append({"id": f"t3_{pid}", "author_id": f"author{k}", "created_utc": 1600000000 + k,
                      "title": f"AITA for post {k}?", "body": body, "deleted": deleted and k % 2 == 1,
                      "moderator": False, "author_override": moderator})
        for j in range(n_top):
            cid += 1
            kind = rng.choice(["verdict_quote", "verdict", "verdict_short", "noverdict", "verdict_quote",
                               "deleted", "mod", "verdict_escaped_quote"])
            body_words = 15 if kind != "verdict_short" else 14
            if kind in ("verdict", "verdict_quote", "verdict_escaped_quote", "deleted", "mod"):
                text = "NTA " + filler(rng, body_words - 1)
            elif kind == "verdict_short":
                text = "YTA " + filler(rng, body_words - 1)
            else:
                text = filler(rng, body_words + 2)
            if kind == "verdict_quote":
                text = "> " + filler(rng, 6) + "\n\n" + text
            if kind == "verdict_escaped_quote":
                text = "&gt; " + filler(rng, 5) + "\n\n" + text
            c = {"id": f"t1_c{cid:03d}", "link_id": f"t3_{pid}", "parent_id": f"t3_{pid}",
                 "author_id": f"user{cid}", "body": text, "deleted": kind == "deleted",
                 "moderator": False, "score": rng.randint(-5, 50)}
            if kind == "mod":
                c["author_id"] = "AutoModerator"
            comments.append(c)
        # a few replies per post (never top-level)
        for j in range(rng.randint(1, 4)):
            cid += 1
            comments.append({"id": f"t1_c{cid:03d}", "link_id": f"t3_{pid}", "parent_id": f"t1_c{cid - 1:03d}",
                             "author_id": f"user{cid}", "body": "> quoted reply\n\nNTA " + filler(rng, 20),
                             "deleted": False, "moderator": False, "score": 1})
    # dangling comment: link to a post that does not exist
    cid += 1
    comments.append({"id": f"t1_c{cid:03d}", "link_id": "t3_missing", "parent_id": "t3_missing",
                     "author_id": "ghost", "body": "NTA " + filler(rng, 20), "score": 0})
    # pad with replies to reach 200 records
    while len(posts) + len(comments) < 200:
        cid += 1
        pid = f"p{(cid % 12):02d}"
        comments.append({"id": f"t1_c{cid:03d}", "link_id": f"t3_{pid}", "parent_id": f"t1_c{cid - 1:03d}",
                         "author_id": f"user{cid}", "body": "YTA " + filler(rng, 18), "score": 2})
    assert len(posts) + len(comments) == 200

    # moderator posts are marked through the author name
    for p in posts:
        if p.pop("author_override"):
            p["author_id"] = "AutoModerator"

    def post_valid(p):
        return not p["deleted"] and p["body"].strip() not in ("[deleted]", "[removed]") \
            and p["author_id"] != "AutoModerator"

    def comment_valid(c):
        return not c.get("deleted", False) and c["body"].strip() not in ("[deleted]", "[removed]") \
            and c["author_id"] != "AutoModerator"

    def base(i):
        return i[3:] if i[:3] in ("t1_", "t3_") else i

    def top_level(c):
        return base(c["parent_id"]) == base(c["link_id"])

    def has_verdict(body):
        return re.search(r"\b(nta|yta)\b", body, re.I) is not None

    post_ids = {base(p["id"]) for p in posts}
    loaded = [c for c in comments if base(c["link_id"]) in post_ids]
    # stage 1
    s1_posts = []
    for p in posts:
        pid = base(p["id"])
        n_top = sum(1 for c in loaded if base(c["link_id"]) == pid and comment_valid(c) and top_level(c))
        if post_valid(p) and len(words(p["body"])) >= 50 and n_top >= 10:
            s1_posts.append(pid)
    s1_comments = [c for c in loaded if base(c["link_id"]) in s1_posts and comment_valid(c)]
    # stage 2
    s2_comments = [c for c in s1_comments if top_level(c) and len(words(c["body"])) >= 15 and has_verdict(c["body"])]
    s2_posts = [p for p in s1_posts if any(base(c["link_id"]) == p for c in s2_comments)]
    # stage 3
    s3_comments = [c for c in s2_comments if has_quote(c["body"])]
    s3_posts = [p for p in s2_posts if any(base(c["link_id"]) == p for c in s3_comments)]

    d = FIX / "corpus200"
    d.mkdir(exist_ok=True)
    with open(d / "posts.jsonl", "w") as f:
        for p in posts:
            f.write(json.dumps(p) + "\n")
    with open(d / "comments.jsonl", "w") as f:
        for c in comments:
            f.write(json.dumps(c) + "\n")
    with open(d / "expected_counts.csv", "w") as f:
        f.write("stage,posts,comments\n")
        f.write(f"rule-based collection,{len(s1_posts)},{len(s1_comments)}\n")
        f.write(f"comment quality filter,{len(s2_posts)},{len(s2_comments)}\n")
        f.write(f"quoting comments selection,{len(s3_posts)},{len(s3_comments)}\n")
    print("corpus200", len(posts), len(comments), len(s1_posts), len(s1_comments),
          len(s2_posts), len(s2_comments), len(s3_posts), len(s3_comments))


# ------------------------------------------------------------- toy KG

TOY_ROWS = [
    ("PersonX abandons the ___ altogether", "xAttr", "irresponsible"),
    ("PersonX abandons ___ altogether", "xAttr", "careless"),
    ("PersonX forces people", "xAttr", "controlling"),
    ("PersonX forces people", "xAttr", "controlling"),
    ("PersonX forces people", "xWant", "to win"),
    ("PersonX gets engaged", "xAttr", "happy"),
    ("PersonX gets a dog", "xAttr", "caring"),
    ("PersonX visits PersonY", "xAttr", "kind"),
    ("PersonX calls PersonY", "xAttr", "friendly"),
    ("PersonX calls PersonY names", "xAttr", "mean"),
    ("PersonX yells at PersonY", "xAttr", "angry"),
    ("PersonX lies to PersonY", "xAttr", "dishonest"),
    ("PersonX borrows PersonY's car", "xAttr", "needy"),
    ("PersonX takes PersonY's car", "xAttr", "selfish"),
    ("PersonX ignores PersonY", "xAttr", "rude"),
    ("PersonX invites PersonY", "xAttr", "welcoming"),
    ("PersonX apologizes to PersonY", "xAttr", "sorry"),
    ("PersonX pays the bill", "xAttr", "generous"),
    ("PersonX cancels the wedding", "xAttr", "none"),
    ("PersonX cancels the party", "xAttr", "unreliable"),
    ("PersonX pushes PersonY", "xAttr", "aggressive"),
    ("PersonX helps PersonY", "xAttr", "helpful"),
    ("PersonX criticizes PersonY", "xAttr", "judgmental"),
]

TOY_INSTANCES = [
    "I abandoned the project altogether after the fight.",
    "My sister took my car and called me names.",
    "She yelled at me in front of my friends.",
    "I visited my aunt and called my mom.",
    "My brother lied to our parents about the money.",
    "I borrowed my roommate's car for the weekend.",
    "He ignored me for a whole week.",
    "We invited the whole family to the party.",
    "I apologized to my sister the next day.",
    "My husband paid the bill at the restaurant.",
    "I canceled the party because of the rain.",
    "She pushed me out of the kitchen.",
    "My friend helped me with the move.",
    "My mom criticized my cooking at dinner.",
    "I got engaged last June.",
    "We got a dog for the kids.",
    "He forced people to leave the room.",
    "My dad took the car and yelled at my brother.",
    "I called my boss and apologized to him.",
    "My cousin borrowed money and lied to me.",
    "She ignored my texts and canceled the trip.",
    "I helped my neighbor and invited him for dinner.",
    "They visited us and paid for everything.",
    "My roommate pushed me and criticized my friends.",
    "I got a new job and called my parents.",
]


def write_toy():
    with open(FIX / "toy_kg.tsv", "w") as f:
        for h, r, t in TOY_ROWS:
            f.write(f"{h}\t{r}\t{t}\n")
    assert len(TOY_INSTANCES) == 25
    with open(FIX / "toy_instances.txt", "w") as f:
        for s in TOY_INSTANCES:
            f.write(s + "\n")


# --------------------------------------------------------- mini-corpus

# (template, verb, heat); {S} subject, {O} object, {P} possessive object
HOT = [
    ("{S} yelled at {O} in front of everyone.", "yell"),
    ("{S} insulted {O} at the party.", "insult"),
    ("{S} lied to {O} about the damn money.", "lie"),
    ("{S} ignored {O} for a whole week.", "ignore"),
    ("{S} pushed {O} out of the kitchen.", "push"),
    ("{S} took {P} car without asking.", "take"),
    ("{S} mocked {O} in the group chat.", "mock"),
    ("{S} threatened {O} with a lawyer.", "threaten"),
    ("{S} screamed at {O} like a crazy person.", "scream"),
    ("{S} blamed {O} for the whole mess.", "blame"),
]
COOL = [
    ("{S} helped {O} with the move.", "help"),
    ("{S} visited {O} last weekend.", "visit"),
    ("{S} invited {O} to dinner.", "invite"),
    ("{S} paid the bill at the restaurant.", "pay"),
    ("{S} called {O} after work.", "call"),
    ("{S} cooked dinner for {O} on Sunday.", "cook"),
    ("{S} thanked {O} for the gift.", "thank"),
    ("{S} borrowed {P} car for a week.", "borrow"),
    ("{S} apologized to {O} the next day.", "apologize"),
    ("{S} planned a trip with {O}.", "plan"),
]
# with their default subject/object pairs
PEOPLE = [("My sister", "my sister", "my sister's"), ("My brother", "my brother", "my brother's"),
          ("My mom", "my mom", "my mom's"), ("My husband", "my husband", "my husband's"),
          ("My roommate", "my roommate", "my roommate's"), ("My friend", "my friend", "my friend's")]

MINI_KG = [
    ("PersonX yells at PersonY", ["angry", "aggressive", "loud"]),
    ("PersonX yells at PersonY in public", ["rude", "mean", "embarrassing"]),
    ("PersonX insults PersonY", ["mean", "rude", "cruel"]),
    ("PersonX insults PersonY's family", ["disrespectful", "hurtful", "rude"]),
    ("PersonX lies to PersonY", ["dishonest", "sneaky", "untrustworthy"]),
    ("PersonX lies about the money", ["dishonest", "greedy", "deceptive"]),
    ("PersonX ignores PersonY", ["rude", "cold", "distant"]),
    ("PersonX ignores PersonY's calls", ["distant", "avoidant", "dismissive"]),
    ("PersonX pushes PersonY", ["aggressive", "violent", "hostile"]),
    ("PersonX pushes PersonY away", ["cold", "distant", "guarded"]),
    ("PersonX takes PersonY's car", ["selfish", "entitled", "inconsiderate"]),
    ("PersonX takes the money", ["greedy", "selfish", "dishonest"]),
    ("PersonX mocks PersonY", ["mean", "condescending", "cruel"]),
    ("PersonX threatens PersonY", ["aggressive", "intimidating", "hostile"]),
    ("PersonX screams at PersonY", ["angry", "loud", "volatile"]),
    ("PersonX blames PersonY", ["defensive", "unfair", "judgmental"]),
    ("PersonX blames PersonY for the mess", ["unfair", "irresponsible", "petty"]),
    ("PersonX helps PersonY", ["helpful", "kind", "supportive"]),
    ("PersonX helps PersonY move", ["helpful", "generous", "reliable"]),
    ("PersonX visits PersonY", ["kind", "caring", "social"]),
    ("PersonX invites PersonY", ["welcoming", "friendly", "generous"]),
    ("PersonX invites PersonY to dinner", ["friendly", "hospitable", "generous"]),
    ("PersonX pays the bill", ["generous", "responsible", "kind"]),
    ("PersonX pays PersonY back", ["responsible", "honest", "fair"]),
    ("PersonX calls PersonY", ["friendly", "caring", "thoughtful"]),
    ("PersonX calls PersonY names", ["mean", "rude", "immature"]),
    ("PersonX cooks dinner for PersonY", ["caring", "thoughtful", "generous"]),
    ("PersonX thanks PersonY", ["grateful", "polite", "kind"]),
    ("PersonX borrows PersonY's car", ["needy", "dependent", "trusting"]),
    ("PersonX apologizes to PersonY", ["sorry", "humble", "mature"]),
    ("PersonX plans a trip", ["organized", "adventurous", "excited"]),
    ("PersonX plans a party for PersonY", ["thoughtful", "organized", "caring"]),
    ("PersonX cancels the wedding", ["unreliable", "indecisive", "flaky"]),
    ("PersonX forgets PersonY's birthday", ["careless", "forgetful", "thoughtless"]),
]

VERDICT_FILLER = [
    "and honestly this whole situation sounds exhausting for everyone in the family involved here",
    "because people should talk things through calmly before it blows up like this again",
    "and I think you need to sit down with them and talk about what happened there",
    "since nobody in this story seems willing to listen to the other side at all here",
    "and the whole family needs to figure out better ways to handle money and plans",
]


def mini_sentence(rng, hot):
    template, verb = rng.choice(HOT if hot else COOL)
    author_subject = rng.random() < 0.5
    person = rng.choice(PEOPLE)
    if author_subject:
        s, o, p = "I", person[1], person[2]
    else:
        s, o, p = person[0], "me", "my"
    text = template.format(S=s, O=o, P=p)
    return text, verb, author_subject


def write_mini():
    rng = random.Random(int(os.environ.get("MINI_SEED", "53")))
    posts, comments = [], []
    cid = 0
    # 13 large threads (one with a short body) and 7 small ones
    for k in range(20):
        pid = f"m{k:02d}"
        large = k < 13
        sentences = []
        if large:
            n = 5 if k == 12 else 16
            for _ in range(n):
                hot = rng.random() < 0.5
                text, verb, author = mini_sentence(rng, hot)
                sentences.append((text, hot, author))
        else:
            for _ in range(8):
                text, _, author = mini_sentence(rng, rng.random() < 0.5)
                sentences.append((text, False, author))
        body = " ".join(s for s, _, _ in sentences)
        posts.append({"id": f"t3_{pid}", "author_id": f"op{k}", "created_utc": 1650000000 + 3600 * k,
                      "title": f"AITA for what happened with my family ({k})?", "body": body})
        n_comments = 10 if large else (2 if k == 19 else 3)
        # sentences to quote
        quoted = []
        for idx, (text, hot, author) in enumerate(sentences):
            if rng.random() < (0.75 if hot else 0.2):
                quoted.append(idx)
        slots = [[] for _ in range(n_comments)]
        for q in quoted:
            slots[rng.randrange(min(n_comments, 8))].append(q)
        for j in range(n_comments):
            cid += 1
            fill = rng.choice(VERDICT_FILLER)
            if slots[j]:
                # judge the first quoted sentence: hot acts draw the verdict that
                # blames their subject, cool acts mostly the one that clears it
                text, hot, author = sentences[slots[j][0]]
                if hot:
                    code = ("YTA" if author else "NTA") if rng.random() < 0.8 else ("NTA" if author else "YTA")
                else:
                    code = ("NTA" if author else "YTA") if rng.random() < 0.8 else "NAH"
                quotes = "\n\n".join("> " + sentences[q][0] for q in slots[j])
                body = f"{quotes}\n\n{code} {fill}."
            elif j % 4 == 3:
                body = rng.choice(["NTA obviously.", "YTA, sorry.", "Lol what a mess."])
            else:
                code = rng.choice(["NTA", "YTA", "ESH", "NAH", "INFO"])
                body = f"{code} {fill}."
            comments.append({"id": f"t1_n{cid:03d}", "link_id": f"t3_{pid}", "parent_id": f"t3_{pid}",
                             "author_id": f"reader{cid}", "body": body, "score": rng.randint(0, 300)})
    assert len(posts) == 20 and len(comments) == 150, (len(posts), len(comments))
    with open(MINI / "posts.jsonl", "w") as f:
        for p in posts:
            f.write(json.dumps(p) + "\n")
    with open(MINI / "comments.jsonl", "w") as f:
        for c in comments:
            f.write(json.dumps(c) + "\n")
    with open(MINI / "kg.tsv", "w") as f:
        for head, attrs in MINI_KG:
            for a in attrs:
                f.write(f"{head}\txAttr\t{a}\n")
            f.write(f"{head}\txWant\tto move on\n")


if __name__ == "__main__":
    FIX.mkdir(exist_ok=True)
    MINI.mkdir(exist_ok=True)
    write_verdicts()
    write_corpus200()
    write_toy()
    write_mini()
