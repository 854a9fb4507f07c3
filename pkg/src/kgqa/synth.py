"""Deterministic synthetic benchmark corpus.

Public QALD endpoints and historical dataset snapshots are unreliable, so
the test and demo fixtures are generated instead: a miniature
Wikidata-flavored world, multilingual benchmark files in QALD and LC-QuAD
formats, a recorded endpoint store holding every gold query's response,
and matching annotation/entity-link fixture files. A smaller "toy" corpus
for sequence-model smoke training is produced alongside.

Everything is driven by seeded RNGs; regenerating yields byte-identical
files.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from kgqa.endpoint import FixtureStore
from kgqa.sparql import default_prefix_table, save_prefix_table

WD = "http://www.wikidata.org/entity/"
XSD = "http://www.w3.org/2001/XMLSchema#"

CITY_CLASS = "Q515"

FIRST_NAMES = [
    "Mira", "Anton", "Livia", "Edgar", "Nadia", "Viktor", "Selma", "Bruno",
    "Clara", "Ivo", "Greta", "Pavel", "Alma", "Rasmus", "Vera", "Leander",
    "Ines", "Matteo", "Dora", "Simon", "Talia", "Oskar", "Lena", "Ruben",
]
LAST_NAMES = [
    "Voss", "Kestrel", "Marek", "Oduya", "Lindqvist", "Ferrar", "Castellan",
    "Brandt", "Okafor", "Selmi", "Navarro", "Holt", "Weiss", "Ayalon",
    "Petrov", "Janda", "Morel", "Saito",
]
CITY_NAMES = [
    "Velmora", "Ashkelon Heights", "Port Danen", "Tervali", "Nokkala",
    "Brevik", "Qastrel", "Miradel", "Ostrino", "Kalvette", "Darnholm",
    "Ruviano", "Selest", "Vintermark", "Azuleja", "Torvant", "Ellendale",
    "Maripol", "Corveille", "Jendrava", "Lusska", "Hartvik", "Pellamore",
    "Sorvin", "Ingadale", "Vostrel", "Camlina", "Drovetto", "Ulmenau",
    "Skarraby", "Fenlowe", "Tarvessa", "Quillon", "Mirabeth", "Yendrin",
    "Caldara", "Obrest", "Lumetta", "Havrenne", "Zelkova",
]
COUNTRY_NAMES = [
    "Vandoria", "Kestrelia", "Norvalle", "Ampara", "Tessaly", "Ourania",
    "Brellund", "Macrovia", "Eldenmark", "Sorvane", "Quorrel", "Istvalia",
]
OCCUPATIONS = [
    ("Q9100", "composer"), ("Q9101", "architect"), ("Q9102", "astronomer"),
    ("Q9103", "novelist"), ("Q9104", "chemist"), ("Q9105", "cartographer"),
]
MOTTO_WORDS = [
    "Onward", "Ever", "Brighter", "Steady", "Rivers", "Stone", "Light",
    "Courage", "Questions", "First",
]


@dataclass
class Person:
    qid: str
    label: str
    spouse: str | None = None
    children: tuple = ()
    birthplace: str = ""
    birthdate: str = ""
    occupations: tuple = ()
    aliases: tuple = ()
    motto: str | None = None
    marriage_start: str | None = None


@dataclass
class City:
    qid: str
    label: str
    population: int
    country: str


@dataclass
class Country:
    qid: str
    label: str
    capital: str


@dataclass
class World:
    people: dict
    cities: dict
    countries: dict
    occupations: dict

    def label(self, qid: str) -> str:
        for table in (self.people, self.cities, self.countries):
            if qid in table:
                return table[qid].label
        return self.occupations[qid]


def build_world(rng: random.Random, n_people: int, n_cities: int,
                n_countries: int, qid_base: int) -> World:
    names = [f"{f} {l}" for f in FIRST_NAMES for l in LAST_NAMES]
    rng.shuffle(names)
    city_names = list(CITY_NAMES)
    rng.shuffle(city_names)
    country_names = list(COUNTRY_NAMES)
    rng.shuffle(country_names)

    next_qid = qid_base

    def take_qid() -> str:
        nonlocal next_qid
        next_qid += 1
        return f"Q{next_qid}"

    countries = {}
    country_ids = []
    for i in range(n_countries):
        qid = take_qid()
        countries[qid] = Country(qid=qid, label=country_names[i], capital="")
        country_ids.append(qid)

    populations = rng.sample(range(20_000, 9_000_000, 137), n_cities)
    cities = {}
    city_ids = []
    for i in range(n_cities):
        qid = take_qid()
        cities[qid] = City(
            qid=qid,
            label=city_names[i % len(city_names)] if i < len(city_names)
            else f"{city_names[i % len(city_names)]} {i}",
            population=populations[i],
            country=country_ids[i % n_countries],
        )
        city_ids.append(qid)
    for i, cqid in enumerate(country_ids):
        owned = [c for c in city_ids if cities[c].country == cqid]
        countries[cqid].capital = owned[0]

    people = {}
    person_ids = []
    used_mottos: set[str] = set()
    for i in range(n_people):
        qid = take_qid()
        year = 1850 + rng.randrange(140)
        month = 1 + rng.randrange(12)
        day = 1 + rng.randrange(28)
        label = names[i]
        n_alias = rng.randrange(3)
        aliases = []
        for a in range(n_alias):
            flavor = rng.choice(["the Elder", "of {city}", "— who else?",
                                 "{brace} edition"])
            alias = f"{label.split()[0]} {flavor}"
            alias = alias.replace("{city}", rng.choice(city_names[:10]))
            alias = alias.replace("{brace}", "{limited}")
            aliases.append(alias)
        motto = None
        if rng.random() < 0.4:
            # Mottos key one query template; keep them globally unique.
            while motto is None or motto in used_mottos:
                words = rng.sample(MOTTO_WORDS, 3)
                style = rng.randrange(3)
                if style == 0:
                    motto = f"{words[0]}, ever {words[1].lower()} {words[2].lower()}"
                elif style == 1:
                    motto = f"{words[0]}? {words[1]} {words[2].lower()}!"
                else:
                    motto = f"{words[0]} {{{words[1]}}} {words[2].lower()}"
            used_mottos.add(motto)
        people[qid] = Person(
            qid=qid,
            label=label,
            birthplace=city_ids[rng.randrange(len(city_ids))],
            birthdate=f"{year:04d}-{month:02d}-{day:02d}T00:00:00Z",
            occupations=tuple(
                q for q, _ in rng.sample(OCCUPATIONS, 1 + rng.randrange(2))
            ),
            aliases=tuple(aliases),
            motto=motto,
        )
        person_ids.append(qid)

    singles = list(person_ids)
    rng.shuffle(singles)
    n_couples = int(len(person_ids) * 0.3)
    for i in range(n_couples):
        a, b = singles[2 * i], singles[2 * i + 1]
        year = 1880 + rng.randrange(120)
        people[a].spouse = b
        people[b].spouse = a
        start = f"{year:04d}-{1 + rng.randrange(12):02d}-01T00:00:00Z"
        people[a].marriage_start = start
        people[b].marriage_start = start
    for qid in person_ids:
        if rng.random() < 0.65:
            k = 1 + rng.randrange(3)
            kids = rng.sample([p for p in person_ids if p != qid], k)
            people[qid].children = tuple(kids)

    return World(
        people=people,
        cities=cities,
        countries=countries,
        occupations=dict(OCCUPATIONS),
    )


def _iri(qid: str) -> dict:
    return {"type": "uri", "value": WD + qid}


def _int_lit(value: int) -> dict:
    return {"type": "literal", "datatype": XSD + "integer", "value": str(value)}


def _date_lit(value: str) -> dict:
    return {"type": "literal", "datatype": XSD + "dateTime", "value": value}


def _lang_lit(value: str, lang: str = "en") -> dict:
    return {"type": "literal", "xml:lang": lang, "value": value}


def _select_body(variables, rows) -> dict:
    return {
        "head": {"vars": list(variables)},
        "results": {
            "bindings": [dict(zip(variables, row)) for row in rows]
        },
    }


def _ask_body(value: bool) -> dict:
    return {"head": {}, "boolean": value}


# Template registry. Each entry renders the question per language, the gold
# SPARQL, and the current-world answer body. `row_producing` marks SELECT
# templates whose result can legitimately become empty on a newer snapshot.

def _t_spouse(world, binding):
    p = world.people[binding[0]]
    rows = [( _iri(p.spouse), )] if p.spouse else []
    return (
        f"SELECT ?spouse WHERE {{ wd:{p.qid} wdt:P26 ?spouse . }}",
        _select_body(["spouse"], rows),
    )


def _t_children(world, binding):
    p = world.people[binding[0]]
    rows = [(_iri(c),) for c in p.children]
    return (
        f"SELECT DISTINCT ?child WHERE {{ wd:{p.qid} wdt:P40 ?child . }}",
        _select_body(["child"], rows),
    )


def _t_married_ask(world, binding):
    a = world.people[binding[0]]
    b = world.people[binding[1]]
    return (
        f"ASK WHERE {{ wd:{a.qid} wdt:P26 wd:{b.qid} . }}",
        _ask_body(a.spouse == b.qid),
    )


def _t_population(world, binding):
    c = world.cities[binding[0]]
    return (
        f"SELECT ?population WHERE {{ wd:{c.qid} wdt:P1082 ?population . }}",
        _select_body(["population"], [(_int_lit(c.population),)]),
    )


def _t_birthdate(world, binding):
    p = world.people[binding[0]]
    return (
        f"SELECT ?date WHERE {{ wd:{p.qid} wdt:P569 ?date . }}",
        _select_body(["date"], [(_date_lit(p.birthdate),)]),
    )


def _t_capital_full_iri(world, binding):
    c = world.countries[binding[0]]
    return (
        f"SELECT ?capital WHERE {{ <{WD}{c.qid}> "
        f"<http://www.wikidata.org/prop/direct/P36> ?capital . }}",
        _select_body(["capital"], [(_iri(c.capital),)]),
    )


def _t_count_children(world, binding):
    p = world.people[binding[0]]
    return (
        f"SELECT ( COUNT ( ?child ) AS ?count ) WHERE "
        f"{{ wd:{p.qid} wdt:P40 ?child . }}",
        _select_body(["count"], [(_int_lit(len(p.children)),)]),
    )


def _t_cities_in(world, binding):
    c = world.countries[binding[0]]
    cities = sorted(
        (q for q, city in world.cities.items() if city.country == c.qid),
        key=lambda q: int(q[1:]),
    )
    rows = [(_iri(q),) for q in cities]
    return (
        f"SELECT ?city WHERE {{ ?city wdt:P31 wd:{CITY_CLASS} . "
        f"?city wdt:P131* wd:{c.qid} . }}",
        _select_body(["city"], rows),
    )


def _t_largest_city(world, binding):
    c = world.countries[binding[0]]
    cities = [city for city in world.cities.values() if city.country == c.qid]
    best = max(cities, key=lambda city: city.population)
    return (
        f"SELECT ?city WHERE {{ ?city wdt:P131 wd:{c.qid} . "
        f"?city wdt:P1082 ?population . }} ORDER BY DESC ( ?population ) LIMIT 1",
        _select_body(["city"], [(_iri(best.qid),)]),
    )


def _t_union_related(world, binding):
    p = world.people[binding[0]]
    related = ([p.spouse] if p.spouse else []) + list(p.children)
    rows = [(_iri(q),) for q in dict.fromkeys(related)]
    return (
        f"SELECT DISTINCT ?person WHERE {{ {{ wd:{p.qid} wdt:P26 ?person . }} "
        f"UNION {{ wd:{p.qid} wdt:P40 ?person . }} }}",
        _select_body(["person"], rows),
    )


def _t_child_birthplace(world, binding):
    p = world.people[binding[0]]
    rows = [
        (_iri(c), _iri(world.people[c].birthplace)) for c in p.children
    ]
    return (
        f"SELECT ?child ?place WHERE {{ wd:{p.qid} wdt:P40 ?child . "
        f"OPTIONAL {{ ?child wdt:P19 ?place . }} }}",
        _select_body(["child", "place"], rows),
    )


def _t_occupation(world, binding):
    p = world.people[binding[0]]
    rows = [(_iri(q),) for q in p.occupations]
    return (
        f"SELECT ?occupation WHERE {{ wd:{p.qid} wdt:P106 ?occupation . }}",
        _select_body(["occupation"], rows),
    )


def _t_alt_label(world, binding):
    p = world.people[binding[0]]
    rows = [(_lang_lit(a),) for a in p.aliases]
    return (
        f"SELECT ?alias WHERE {{ wd:{p.qid} skos:altLabel ?alias . "
        f'FILTER ( LANG ( ?alias ) = "en" ) }}',
        _select_body(["alias"], rows),
    )


def _t_motto_match(world, binding):
    p = world.people[binding[0]]
    motto = p.motto.replace("\\", "\\\\").replace('"', '\\"')
    return (
        f'SELECT ?x WHERE {{ ?x wdt:P1451 "{motto}"@en . }}',
        _select_body(["x"], [(_iri(p.qid),)]),
    )


def _t_first_spouse(world, binding):
    p = world.people[binding[0]]
    rows = [(_iri(p.spouse),)] if p.spouse else []
    return (
        f"SELECT ?spouse WHERE {{ wd:{p.qid} p:P26 ?statement . "
        f"?statement ps:P26 ?spouse . ?statement pq:P580 ?start . }} "
        f"ORDER BY ?start LIMIT 1",
        _select_body(["spouse"], rows),
    )


@dataclass(frozen=True)
class Template:
    tid: str
    questions: dict
    build: object
    row_producing: bool = True  # emptyable SELECT result


TEMPLATES = [
    Template(
        "spouse",
        {
            "en": "Who is the spouse of {0}?",
            "de": "Wer ist der Ehepartner von {0}?",
            "ru": "Кто супруг {0}?",
            "fr": "Qui est le conjoint de {0} ?",
            "zh": "{0}的配偶是谁？",
            "ja": "{0}の配偶者は誰ですか？",
        },
        _t_spouse,
    ),
    Template(
        "children",
        {
            "en": "Who are the children of {0}?",
            "de": "Wer sind die Kinder von {0}?",
            "ru": "Кто дети {0}?",
            "fr": "Qui sont les enfants de {0} ?",
            "zh": "{0}的孩子是谁？",
            "ja": "{0}の子供は誰ですか？",
        },
        _t_children,
    ),
    Template(
        "married_ask",
        {
            "en": "Is {0} married to {1}?",
            "de": "Ist {0} mit {1} verheiratet?",
            "ru": "Женат ли {0} на {1}?",
            "fr": "Est-ce que {0} est marié à {1} ?",
            "zh": "{0}和{1}结婚了吗？",
            "ja": "{0}は{1}と結婚していますか？",
        },
        _t_married_ask,
        row_producing=False,
    ),
    Template(
        "population",
        {
            "en": "What is the population of {0}?",
            "de": "Wie viele Einwohner hat {0}?",
            "ru": "Какое население у {0}?",
            "fr": "Quelle est la population de {0} ?",
            "zh": "{0}有多少人口？",
            "ja": "{0}の人口はどれくらいですか？",
        },
        _t_population,
    ),
    Template(
        "birthdate",
        {
            "en": "When was {0} born?",
            "de": "Wann wurde {0} geboren?",
            "ru": "Когда родился {0}?",
            "fr": "Quand est né {0} ?",
            "zh": "{0}是什么时候出生的？",
            "ja": "{0}はいつ生まれましたか？",
        },
        _t_birthdate,
    ),
    Template(
        "capital",
        {
            "en": "What is the capital of {0}?",
            "de": "Was ist die Hauptstadt von {0}?",
            "ru": "Какая столица у {0}?",
            "fr": "Quelle est la capitale de {0} ?",
            "zh": "{0}的首都是哪里？",
            "ja": "{0}の首都はどこですか？",
        },
        _t_capital_full_iri,
    ),
    Template(
        "count_children",
        {
            "en": "How many children does {0} have?",
            "de": "Wie viele Kinder hat {0}?",
            "ru": "Сколько детей у {0}?",
            "fr": "Combien d'enfants a {0} ?",
            "zh": "{0}有几个孩子？",
            "ja": "{0}には子供が何人いますか？",
        },
        _t_count_children,
        row_producing=False,  # COUNT always yields one row
    ),
    Template(
        "cities_in",
        {
            "en": "Which cities are located in {0}?",
            "de": "Welche Städte liegen in {0}?",
            "ru": "Какие города находятся в {0}?",
            "fr": "Quelles villes se trouvent en {0} ?",
            "zh": "哪些城市位于{0}？",
            "ja": "{0}にはどの都市がありますか？",
        },
        _t_cities_in,
    ),
    Template(
        "largest_city",
        {
            "en": "What is the largest city of {0}?",
            "de": "Was ist die größte Stadt von {0}?",
            "ru": "Какой самый большой город в {0}?",
            "fr": "Quelle est la plus grande ville de {0} ?",
            "zh": "{0}最大的城市是哪个？",
            "ja": "{0}で最も大きい都市はどこですか？",
        },
        _t_largest_city,
    ),
    Template(
        "union_related",
        {
            "en": "Who is related to {0} as spouse or child?",
            "de": "Wer ist mit {0} als Ehepartner oder Kind verwandt?",
            "ru": "Кто связан с {0} как супруг или ребёнок?",
            "fr": "Qui est lié à {0} comme conjoint ou enfant ?",
            "zh": "谁是{0}的配偶或孩子？",
            "ja": "{0}の配偶者または子供は誰ですか？",
        },
        _t_union_related,
    ),
    Template(
        "child_birthplace",
        {
            "en": "Where were the children of {0} born?",
            "de": "Wo wurden die Kinder von {0} geboren?",
            "ru": "Где родились дети {0}?",
            "fr": "Où sont nés les enfants de {0} ?",
            "zh": "{0}的孩子出生在哪里？",
            "ja": "{0}の子供はどこで生まれましたか？",
        },
        _t_child_birthplace,
    ),
    Template(
        "occupation",
        {
            "en": "What is the occupation of {0}?",
            "de": "Was ist der Beruf von {0}?",
            "ru": "Кем работает {0}?",
            "fr": "Quelle est la profession de {0} ?",
            "zh": "{0}的职业是什么？",
            "ja": "{0}の職業は何ですか？",
        },
        _t_occupation,
    ),
    Template(
        "alt_label",
        {
            "en": "What is {0} also known as?",
            "de": "Unter welchem Namen ist {0} auch bekannt?",
            "ru": "Как ещё называют {0}?",
            "fr": "Sous quel autre nom {0} est-il connu ?",
            "zh": "{0}还有什么别名？",
            "ja": "{0}は他に何と呼ばれていますか？",
        },
        _t_alt_label,
    ),
    Template(
        "motto_match",
        {
            "en": 'Whose motto is "{0}"?',
            "de": 'Wessen Motto ist "{0}"?',
            "ru": 'Чей девиз "{0}"?',
            "fr": 'De qui "{0}" est-il la devise ?',
            "zh": '谁的座右铭是"{0}"？',
            "ja": '"{0}"をモットーとするのは誰ですか？',
        },
        _t_motto_match,
    ),
    Template(
        "first_spouse",
        {
            "en": "Who was {0} married to first?",
            "de": "Mit wem war {0} zuerst verheiratet?",
            "ru": "С кем {0} состоял в браке первым?",
            "fr": "Avec qui {0} a-t-il été marié en premier ?",
            "zh": "{0}最初和谁结婚？",
            "ja": "{0}が最初に結婚した相手は誰ですか？",
        },
        _t_first_spouse,
    ),
]

TEMPLATE_INDEX = {t.tid: t for t in TEMPLATES}


def _binding_pools(world: World, rng: random.Random) -> dict:
    people = sorted(world.people, key=lambda q: int(q[1:]))
    cities = sorted(world.cities, key=lambda q: int(q[1:]))
    countries = sorted(world.countries, key=lambda q: int(q[1:]))
    married = [q for q in people if world.people[q].spouse]
    with_kids = [q for q in people if world.people[q].children]
    with_alias = [q for q in people if world.people[q].aliases]
    with_motto = [q for q in people if world.people[q].motto]
    couples = [(q, world.people[q].spouse) for q in married]
    non_couples = []
    for _ in range(len(couples)):
        a, b = rng.sample(people, 2)
        if world.people[a].spouse != b:
            non_couples.append((a, b))
    return {
        "spouse": [(q,) for q in married],
        "children": [(q,) for q in with_kids],
        "married_ask": couples + non_couples,
        "population": [(q,) for q in cities],
        "birthdate": [(q,) for q in people],
        "capital": [(q,) for q in countries],
        "count_children": [(q,) for q in people],
        "cities_in": [(q,) for q in countries],
        "largest_city": [(q,) for q in countries],
        "union_related": [(q,) for q in with_kids if world.people[q].spouse],
        "child_birthplace": [(q,) for q in with_kids],
        "occupation": [(q,) for q in people],
        "alt_label": [(q,) for q in with_alias],
        "motto_match": [(q,) for q in with_motto],
        "first_spouse": [(q,) for q in married],
    }


@dataclass
class GenItem:
    qid: str
    template: Template
    binding: tuple
    texts: dict
    sparql: str
    body: dict


def _question_args(world: World, template: Template, binding: tuple):
    if template.tid == "motto_match":
        return (world.people[binding[0]].motto,)
    return tuple(world.label(q) for q in binding)


def _make_items(world, combos, langs, id_start=1) -> list[GenItem]:
    items = []
    for offset, (template, binding) in enumerate(combos):
        args = _question_args(world, template, binding)
        texts = {
            lang: template.questions[lang].format(*args)
            for lang in langs
            if lang in template.questions
        }
        sparql, body = template.build(world, binding)
        items.append(
            GenItem(
                qid=str(id_start + offset),
                template=template,
                binding=binding,
                texts=texts,
                sparql=sparql,
                body=body,
            )
        )
    return items


def _draw_combos(pools: dict, rng: random.Random, total: int) -> list:
    """Interleave template pools into `total` distinct (template, binding)
    pairs, spreading templates roughly evenly."""
    queues = {}
    for tid, pool in pools.items():
        pool = list(pool)
        rng.shuffle(pool)
        queues[tid] = pool
    combos = []
    seen = set()
    order = sorted(queues)
    while len(combos) < total:
        progressed = False
        for tid in order:
            while queues[tid]:
                binding = queues[tid].pop()
                if (tid, binding) in seen:
                    continue
                seen.add((tid, binding))
                combos.append((TEMPLATE_INDEX[tid], binding))
                progressed = True
                break
            if len(combos) == total:
                break
        if not progressed:
            raise RuntimeError("binding pools exhausted; enlarge the world")
    rng.shuffle(combos)
    return combos


def _empty_like(body: dict) -> dict:
    return {"head": {"vars": list(body["head"]["vars"])},
            "results": {"bindings": []}}


def _perturb(body: dict, rng: random.Random) -> dict:
    """An 'older snapshot' variant of a bindings body: one value replaced."""
    rows = body["results"]["bindings"]
    if not rows:
        return body
    new_rows = [dict(r) for r in rows]
    target = new_rows[rng.randrange(len(new_rows))]
    var = sorted(target)[0]
    old = dict(target[var])
    if old["type"] == "uri":
        old["value"] = old["value"] + "0"
    else:
        old["value"] = old["value"] + "1" if old["value"][-1].isdigit() \
            else old["value"] + " (old)"
    target[var] = old
    return {"head": dict(body["head"]), "results": {"bindings": new_rows}}


# --- naive deterministic annotations -------------------------------------

_PUNCT_CHARS = "?.!,？。、"
_AUX_WORDS = {
    "en": {"is", "are", "was", "were", "does", "do", "did", "has", "have"},
    "de": {"ist", "sind", "war", "waren", "hat", "haben", "wurde", "wurden",
           "liegen"},
}
_DET_WORDS = {
    "en": {"the", "a", "an"},
    "de": {"der", "die", "das", "den", "dem", "ein", "eine"},
}
_ADP_WORDS = {
    "en": {"of", "in", "to", "as", "on", "by", "at", "with"},
    "de": {"von", "in", "mit", "als", "zu", "unter", "bei"},
}
_WH_WORDS = {
    "en": {"who", "what", "which", "when", "where", "whose", "how"},
    "de": {"wer", "was", "welche", "wann", "wo", "wessen", "wie", "womit",
           "wem"},
}


def naive_tokenize(text: str) -> list[str]:
    tokens = []
    for chunk in text.split():
        start = 0
        end = len(chunk)
        lead = []
        while start < end and chunk[start] in "\"'«(":
            lead.append(chunk[start])
            start += 1
        tail = []
        while end > start and chunk[end - 1] in _PUNCT_CHARS + "\"'»)":
            tail.append(chunk[end - 1])
            end -= 1
        tokens.extend(lead)
        if end > start:
            tokens.append(chunk[start:end])
        tokens.extend(reversed(tail))
    return tokens


def pseudo_annotate(text: str, lang: str) -> list[dict]:
    """Deterministic stand-in for a real tagger; shape-valid, not accurate."""
    words = naive_tokenize(text)
    if not words:
        return []
    lower = [w.lower() for w in words]
    aux = _AUX_WORDS.get(lang, set())
    det = _DET_WORDS.get(lang, set())
    adp = _ADP_WORDS.get(lang, set())
    wh = _WH_WORDS.get(lang, set())
    root = next((i for i, w in enumerate(lower) if w in aux), 0)
    records = []
    for i, word in enumerate(words):
        if word in _PUNCT_CHARS or all(not c.isalnum() for c in word):
            pos, dep = "PUNCT", "punct"
        elif word.isdigit():
            pos, dep = "NUM", "nummod"
        elif lower[i] in wh:
            pos, dep = "PRON", "attr"
        elif lower[i] in aux:
            pos, dep = "AUX", "aux"
        elif lower[i] in det:
            pos, dep = "DET", "det"
        elif lower[i] in adp:
            pos, dep = "ADP", "case"
        elif word[:1].isupper() and i > 0:
            pos, dep = "PROPN", "nmod"
        else:
            pos, dep = "NOUN", "dep"
        if i == root:
            dep = "ROOT"
            head = i
        elif i < root:
            head = root
        else:
            head = i - 1
        records.append({"surface": word, "pos": pos, "dep": dep, "head": head})
    return records


def entity_links_for(world: World, item: GenItem, lang: str) -> list[dict]:
    text = item.texts[lang]
    links = []
    if item.template.tid == "motto_match":
        return links
    for qid in item.binding:
        label = world.label(qid)
        start = text.find(label)
        if start == -1:
            continue
        links.append(
            {"surface": label, "kb_id": qid, "start": start,
             "end": start + len(label)}
        )
    return sorted(links, key=lambda l: l["start"])


# --- file emission --------------------------------------------------------


def qald_document(items: list[GenItem], bodies: dict | None = None) -> dict:
    questions = []
    for item in items:
        body = bodies[item.qid] if bodies else item.body
        questions.append(
            {
                "id": item.qid,
                "question": [
                    {"language": lang, "string": item.texts[lang]}
                    for lang in sorted(item.texts)
                ],
                "query": {"sparql": item.sparql},
                "answers": [body],
            }
        )
    return {"questions": questions}


def _dump(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, ensure_ascii=False, indent=1)
        handle.write("\n")


def _dump_jsonl(path: Path, records) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            handle.write("\n")


def _annotation_records(world, items, langs):
    seen = set()
    per_lang = {lang: [] for lang in langs}
    entity_per_lang = {lang: [] for lang in langs}
    for item in items:
        for lang in langs:
            if lang not in item.texts:
                continue
            text = item.texts[lang]
            if (lang, text) in seen:
                continue
            seen.add((lang, text))
            per_lang[lang].append(
                {"text": text, "lang": lang,
                 "tokens": pseudo_annotate(text, lang)}
            )
            entity_per_lang[lang].append(
                {"text": text, "lang": lang,
                 "links": entity_links_for(world, item, lang)}
            )
    return per_lang, entity_per_lang


MAIN_COUNTS = {"qald9plus-train": 371, "qald9plus-test": 136,
               "qald10-test": 394}
STALE_TEST_ITEMS = 34
CHANGED_TEST_ITEMS = 9
ANNOTATED_LANGS = ("en", "de")


def generate_main_corpus(out_dir: Path, seed: int = 20240514) -> dict:
    """Benchmark files, endpoint store and provider fixtures; returns paths."""
    out_dir = Path(out_dir)
    rng = random.Random(seed)
    world = build_world(rng, n_people=240, n_cities=40, n_countries=12,
                        qid_base=1000)
    pools = _binding_pools(world, rng)
    total = sum(MAIN_COUNTS.values())
    combos = _draw_combos(pools, rng, total)

    train_combos = combos[: MAIN_COUNTS["qald9plus-train"]]
    test_combos = combos[
        MAIN_COUNTS["qald9plus-train"]:
        MAIN_COUNTS["qald9plus-train"] + MAIN_COUNTS["qald9plus-test"]
    ]
    qald10_combos = combos[-MAIN_COUNTS["qald10-test"]:]

    qald9_langs = ("en", "de", "ru", "fr")
    qald10_langs = ("en", "de", "ru", "zh", "ja")
    train_items = _make_items(world, train_combos, qald9_langs)
    test_items = _make_items(world, test_combos, qald9_langs)
    qald10_items = _make_items(world, qald10_combos, qald10_langs)

    # A newer endpoint snapshot disagrees with the shipped test answers:
    # some queries now come back empty, a few return different values.
    emptyable = [i for i, item in enumerate(test_items)
                 if item.template.row_producing]
    rng2 = random.Random(seed + 1)
    stale = set(rng2.sample(emptyable, STALE_TEST_ITEMS))
    changeable = [i for i in emptyable if i not in stale]
    changed = set(rng2.sample(changeable, CHANGED_TEST_ITEMS))

    store = FixtureStore()
    shipped_test_bodies = {}
    for index, item in enumerate(test_items):
        if index in stale:
            store.record(item.sparql, _empty_like(item.body))
            shipped_test_bodies[item.qid] = item.body
        elif index in changed:
            store.record(item.sparql, item.body)
            shipped_test_bodies[item.qid] = _perturb(item.body, rng2)
        else:
            store.record(item.sparql, item.body)
            shipped_test_bodies[item.qid] = item.body
    for item in train_items + qald10_items:
        store.record(item.sparql, item.body)

    paths = {
        "qald9plus-train": out_dir / "qald9plus-train.json",
        "qald9plus-test": out_dir / "qald9plus-test.json",
        "qald10-test": out_dir / "qald10-test.json",
        "store": out_dir / "endpoint_store.json",
    }
    _dump(paths["qald9plus-train"], qald_document(train_items))
    _dump(paths["qald9plus-test"],
          qald_document(test_items, bodies=shipped_test_bodies))
    _dump(paths["qald10-test"], qald_document(qald10_items))
    store.save(paths["store"])

    all_items = train_items + test_items + qald10_items
    annotations, entity_links = _annotation_records(
        world, all_items, ANNOTATED_LANGS
    )
    for lang in ANNOTATED_LANGS:
        ann_path = out_dir / f"annotations.{lang}.jsonl"
        ent_path = out_dir / f"entities.{lang}.jsonl"
        _dump_jsonl(ann_path, annotations[lang])
        _dump_jsonl(ent_path, entity_links[lang])
        paths[f"annotations.{lang}"] = ann_path
        paths[f"entities.{lang}"] = ent_path

    lcquad = [
        {
            "uid": 30000 + i,
            "question": item.texts["en"],
            "paraphrased_question": "Please tell me: " + item.texts["en"],
            "sparql_wikidata": item.sparql,
        }
        for i, item in enumerate(train_items[:3])
    ]
    paths["lcquad-sample"] = out_dir / "lcquad-sample.json"
    _dump(paths["lcquad-sample"], lcquad)

    save_prefix_table(default_prefix_table(), out_dir / "prefixes.tsv")
    paths["prefixes"] = out_dir / "prefixes.tsv"
    return paths


# --- toy corpus for sequence-model smoke training -------------------------

TOY_TEMPLATES = {
    "spouse": {
        "en": ("Who is the spouse of {0}?", "Tell me the spouse of {0}."),
        "de": ("Wer ist der Ehepartner von {0}?",
               "Nenne den Ehepartner von {0}."),
    },
    "birthplace": {
        "en": ("Where was {0} born?", "In which place was {0} born?"),
        "de": ("Wo wurde {0} geboren?", "An welchem Ort wurde {0} geboren?"),
    },
    "married_ask": {
        "en": ("Is {0} married to {1}?", "Are {0} and {1} married?"),
        "de": ("Ist {0} mit {1} verheiratet?",
               "Sind {0} und {1} verheiratet?"),
    },
    "capital": {
        "en": ("What is the capital of {0}?", "Name the capital of {0}."),
        "de": ("Was ist die Hauptstadt von {0}?",
               "Nenne die Hauptstadt von {0}."),
    },
    "population": {
        "en": ("What is the population of {0}?",
               "How many people live in {0}?"),
        "de": ("Wie viele Einwohner hat {0}?",
               "Wie viele Menschen leben in {0}?"),
    },
}


def _toy_sparql(world: World, tid: str, binding: tuple):
    if tid == "spouse":
        return _t_spouse(world, binding)
    if tid == "birthplace":
        p = world.people[binding[0]]
        return (
            f"SELECT ?place WHERE {{ wd:{p.qid} wdt:P19 ?place . }}",
            _select_body(["place"], [(_iri(p.birthplace),)]),
        )
    if tid == "married_ask":
        return _t_married_ask(world, binding)
    if tid == "capital":
        c = world.countries[binding[0]]
        return (
            f"SELECT ?capital WHERE {{ wd:{c.qid} wdt:P36 ?capital . }}",
            _select_body(["capital"], [(_iri(c.capital),)]),
        )
    return _t_population(world, binding)


def generate_toy_corpus(out_dir: Path, seed: int = 77001) -> dict:
    """Tiny 5-template corpus: train items use one phrasing, held-out items
    rephrase the same question; both share one recorded store."""
    out_dir = Path(out_dir)
    rng = random.Random(seed)
    world = build_world(rng, n_people=40, n_cities=12, n_countries=6,
                        qid_base=9000)
    people = sorted(world.people, key=lambda q: int(q[1:]))
    cities = sorted(world.cities, key=lambda q: int(q[1:]))
    countries = sorted(world.countries, key=lambda q: int(q[1:]))
    married = [q for q in people if world.people[q].spouse]

    combos: list[tuple[str, tuple]] = []
    combos += [("spouse", (q,)) for q in married]
    combos += [("birthplace", (q,)) for q in people]
    combos += [("married_ask", (q, world.people[q].spouse))
               for q in married[:10]]
    pairs = []
    while len(pairs) < 10:
        a, b = rng.sample(people, 2)
        if world.people[a].spouse != b and (a, b) not in pairs:
            pairs.append((a, b))
    combos += [("married_ask", pair) for pair in pairs]
    combos += [("capital", (q,)) for q in countries]
    combos += [("population", (q,)) for q in cities]
    rng.shuffle(combos)
    combos = combos[:100]

    store = FixtureStore()
    train_items = []
    test_items = []
    test_pick = set(rng.sample(range(len(combos)), 50))
    for index, (tid, binding) in enumerate(combos):
        args = tuple(world.label(q) for q in binding)
        sparql, body = _toy_sparql(world, tid, binding)
        store.record(sparql, body)
        # Each training pair uses one of the two phrasings at random; the
        # held-out twin asks the same question with the other phrasing, so
        # both phrasings are trained somewhere and held-out items are pure
        # paraphrases of trained ones.
        variant = {lang: rng.randrange(2) for lang in ("en", "de")}
        texts_train = {
            lang: TOY_TEMPLATES[tid][lang][variant[lang]].format(*args)
            for lang in ("en", "de")
        }
        template = TEMPLATE_INDEX.get(tid) or Template(tid, {}, None)
        train_items.append(
            GenItem(qid=str(index + 1), template=template, binding=binding,
                    texts=texts_train, sparql=sparql, body=body)
        )
        if index in test_pick:
            texts_heldout = {
                lang: TOY_TEMPLATES[tid][lang][1 - variant[lang]].format(*args)
                for lang in ("en", "de")
            }
            test_items.append(
                GenItem(qid=f"h{index + 1}", template=template,
                        binding=binding, texts=texts_heldout, sparql=sparql,
                        body=body)
            )

    paths = {
        "toy-train": out_dir / "toy-train.json",
        "toy-test": out_dir / "toy-test.json",
        "store": out_dir / "toy_store.json",
    }
    _dump(paths["toy-train"], qald_document(train_items))
    _dump(paths["toy-test"], qald_document(test_items))
    store.save(paths["store"])

    annotations, entity_links = _annotation_records(
        world, train_items + test_items, ("en", "de")
    )
    for lang in ("en", "de"):
        ann_path = out_dir / f"annotations.{lang}.jsonl"
        ent_path = out_dir / f"entities.{lang}.jsonl"
        _dump_jsonl(ann_path, annotations[lang])
        _dump_jsonl(ent_path, entity_links[lang])
        paths[f"annotations.{lang}"] = ann_path
        paths[f"entities.{lang}"] = ent_path
    return paths
