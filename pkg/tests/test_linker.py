import pytest

from glowqa.errors import EntityNotFoundError, LinkingError, UnderstandingError
from glowqa.kgstore import BGP
from glowqa.linker import (
    LinkedQuestion,
    QuestionParse,
    link,
    match_bgp,
    parse_question,
    resolve_entity,
)
from glowqa.llm import LlmSession, MockChatGateway

B = "http://www.biokg.com/"
M = "http://www.linkedmdb.org/"

YO_QUESTION = "Predict the chemical kingdom for the drug Yohimbine from the BioKG knowledge graph."


def session(*rules) -> LlmSession:
    mock = MockChatGateway()
    for kind, value, response in rules:
        mock.add(kind, value, response)
    return LlmSession(mock)


def test_parse_question_reference_example():
    llm = session(
        (
            "substring",
            YO_QUESTION,
            "1-Question main entity: Drug 2-Main Entity: Yohimbine\n"
            "3-Prediction label: kingdom 4-KG name: BioKG",
        )
    )
    parse = parse_question(YO_QUESTION, llm)
    assert parse == QuestionParse("Drug", "Yohimbine", "kingdom", "BioKG", ("kingdom",))


def test_parse_question_handles_shuffled_numbering():
    llm = session(("default", "", "3- kingdom\n1- Drug\n4- BioKG\n2- Yohimbine"))
    parse = parse_question("anything", llm)
    assert parse.entity_type_text == "Drug"
    assert parse.entity_text == "Yohimbine"
    assert parse.label_text == "kingdom"
    assert parse.kg_name == "BioKG"


def test_parse_question_missing_field_twice_errors():
    llm = session(("default", "", "1- Drug 2- Yohimbine 4- BioKG"))
    with pytest.raises(UnderstandingError):
        parse_question("anything", llm)
    assert len(llm.gateway.requests) == 2  # one retry happened


def test_parse_question_two_hop_label():
    llm = session(("default", "", "1- Film 2- F1 3- SEQUEL -> GENRE 4- lmdb"))
    parse = parse_question("anything", llm)
    assert parse.hop_label_texts == ("SEQUEL", "GENRE")


def test_link_species_predicate_iri(biokg):
    parse = QuestionParse("Protein", "Q9LTJ2", "species", "BioKG", ("species",))
    llm = session(
        ("default", "", "1- Protein\n2- Protein, NAME, Literal\n3- Protein, SPECIES, Species")
    )
    linked = link(parse, biokg.schema, biokg.store, llm)
    assert linked.e_path == (f"{B}property/SPECIES",)
    assert linked.v_t == f"{B}protein/Q9LTJ2"
    assert linked.label_type == "Species"
    assert linked.label_bgp == BGP("Protein", "SPECIES", "Species")
    assert not linked.ambiguous


def test_link_unknown_entity(biokg):
    parse = QuestionParse("Drug", "Nonexistium", "kingdom", "BioKG", ("kingdom",))
    llm = session(("default", "", "1- Drug\n2- Drug, NAME, Literal\n3- Drug, KINGDOM, Kingdom"))
    with pytest.raises(EntityNotFoundError):
        link(parse, biokg.schema, biokg.store, llm)


def test_link_ambiguous_name_takes_smallest_iri(lmdb):
    parse = QuestionParse("Film", "Avatar", "language", "lmdb", ("language",))
    llm = session(("default", "", "1- Film\n2- Film, NAME, Literal\n3- Film, LANGUAGE, Language"))
    linked = link(parse, lmdb.schema, lmdb.store, llm)
    assert linked.v_t == f"{M}film/AvatarX"
    assert linked.ambiguous


def test_link_rejects_bgp_outside_schema(biokg):
    parse = QuestionParse("Drug", "Yohimbine", "kingdom", "BioKG", ("kingdom",))
    llm = session(("default", "", "1- Drug\n2- Drug, NAME, Literal\n3- Drug, BOGUS, Thing"))
    with pytest.raises(LinkingError):
        link(parse, biokg.schema, biokg.store, llm)


def test_link_two_hop_appends_second_edge(lmdb):
    parse = QuestionParse("Film", "Film 003", "sequel genre", "lmdb", ("SEQUEL", "GENRE"))
    llm = session(
        ("substring", "describe the  Film SEQUEL", "1- Film\n2- Film, NAME, Literal\n3- Film, SEQUEL, Film"),
        ("substring", "describe the  Film GENRE", "1- Film\n2- Film, NAME, Literal\n3- Film, GENRE, Genre"),
    )
    linked = link(parse, lmdb.schema, lmdb.store, llm)
    assert linked.e_path == (f"{M}SEQUEL", f"{M}GENRE")
    assert linked.label_type == "Genre"
    assert linked.hops == 2
    schema_preds = {b.predicate.lower() for b in lmdb.schema.bgps}
    from glowqa.kgstore import local_name

    assert {local_name(p).lower() for p in linked.e_path} <= schema_preds


def test_link_with_fixed_transcript_is_deterministic(biokg):
    parse = QuestionParse("Drug", "Yohimbine", "kingdom", "BioKG", ("kingdom",))

    def fresh() -> LinkedQuestion:
        llm = session(
            ("default", "", "1- Drug\n2- Drug, NAME, Literal\n3- Drug, KINGDOM, Kingdom")
        )
        return link(parse, biokg.schema, biokg.store, llm)

    assert fresh() == fresh()


def test_match_bgp_normalizes_noise(biokg):
    row = match_bgp("`( drug ,  kingdom , Kingdom )`", biokg.schema)
    assert row == BGP("Drug", "KINGDOM", "Kingdom")
    row = match_bgp(f"Drug, {B}KINGDOM, Kingdom", biokg.schema)
    assert row == BGP("Drug", "KINGDOM", "Kingdom")
    assert match_bgp("not a bgp", biokg.schema) is None


def test_resolve_entity_exact_before_case_insensitive(biokg):
    iri, ambiguous = resolve_entity("Yohimbine", biokg.store)
    assert iri == f"{B}drug/DB01392"
    assert not ambiguous
    iri_ci, _ = resolve_entity("YOHIMBINE", biokg.store)
    assert iri_ci == iri
