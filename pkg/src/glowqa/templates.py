"""Prompt templates for every LLM call the engine makes.

The texts are filled verbatim; tests pin the composed GN answer prompt
byte-for-byte, so edit these strings with care (including the doubled
spaces and the spelling quirks, which are intentional).
"""

QUESTION_UNDERSTANDING_SYSTEM = "You are an an expert Entity-Extraction NLP system."

QUESTION_UNDERSTANDING_USER = """\
Given the following question, identify 1-The question main entity type, 2- the main entity, 3- the prediction label and
4- the KG name.
Question: {question}
Answer:
1-Question main entity:  2-Main Entity:
3-Prediction label: 4-KG name:"""


LINKING_SYSTEM = "You are an an expert knowledge graph entity-relation Linking NLP system."

LINKING_USER = """\
Given the following KG Schema in the basic graph pattern CSV format, one predicate per line:
node type, relation, node type.
-----------
KG Schema:
{schema_csv}
------------
1- What is the node type in the schema that corresponds to {main_entity}? Return only the name.
2- Choose from the schema the BGP (node type, relation, node type) that describes the  {main_entity_type} value {main_entity}. Return only the BGP.
3- Choose from the schema the BGP
(node type, relation, node type) that describe the  {main_entity_type} {prediction_label}.
Return only the BGP.
------------
Answer:
1-
2-
3-"""


TEXT_TO_SPARQL_SYSTEM = "You are an an expert text-To-SPARQL translation system."

TEXT_TO_SPARQL_USER = """\
Given the following KG Schema in the basic graph pattern CSV format, one predicate per line:
node type, relation, node type.
-----------
KG Schema:
{schema_csv}
------------
Write a SPARQL query that selects the {main_entity_type} that satisfy the following BGPs.
1-  {question_node_type} ,[label/name/titile] ,{question_node}
{other_bgps}
graph prefix: {kg_prefix}
--------------------
Answer: SPARQL Query
Do not return any explanation or reasoning details."""


ANSWER_SYSTEM = "You are an expert open world question answering system."

# Shared first lines of the four answer prompts. The double space before the
# entity type is deliberate.
_QUESTION_LINE = (
    "What is the {label_type} of the  {entity_type} {entity} from the "
    "{kg_details} knowledge graph."
)
_NO_CONTEXT_LINE = "- Do not return any context or analysis."

ANSWER_BASIC_USER = (
    _QUESTION_LINE
    + "\n"
    + _NO_CONTEXT_LINE
    + "\n- Help: The possible list of {label_type}s are: [{labels}]"
    + "\nAnswer:"
)

ANSWER_G_USER = (
    _QUESTION_LINE
    + "\n"
    + _NO_CONTEXT_LINE
    + "\n- Help: The possible list of {label_type}s are: [{labels}]"
    + "\n- The {entity_type} associated  triples."
    + "\n {rc}"
    + "\nAnswer:"
)

ANSWER_N_USER = (
    _QUESTION_LINE
    + "\n"
    + _NO_CONTEXT_LINE
    + "\n- Help: The possible list of {label_type}s are: [{labels}]"
    + "\n-  Verify the following list of GNN  Answers: [ {gnn_answers}]"
    + "\nAnswer:"
)

ANSWER_GN_USER = (
    _QUESTION_LINE
    + "\n"
    + _NO_CONTEXT_LINE
    + "\n- Help: The possible list of {label_type}s are : [{labels}]"
    + "\n- Verify the following  GNN  Answer: [ {gnn_top1}]"
    + "\n- The {entity_type} associated  triples."
    + "\n {rc}"
    + "\nAnswer:"
)


JUDGE_SYSTEM = "You are an expert LLM-as-a-Judge system."

JUDGE_USER = """\
Given the following list of predicted and true pairs of values.
-Rank the predicted value against the true value using two metrics.
1- Exact Match Rule: you compare the two strings after normalization and remove any special characters. report 1 if both values are literally and semantically equal and 0 otherwise.
2- Hierarchical/Categorical Match Rule: report 1 if the predicted value is under a subcategory or hierarchically belongs to the true value or is a synonym and 0 otherwise.
- Example:
List of pairs: [[music, art], [painter, artist],[ football player, soccer player], [ lawyer, judge], [lawyer, player]]
Answer: [[0,1],[0,1],[1,1],[0,1],[0,0]]
- Question:
-List of pairs: {pairs}
-Note: refine each pair and return Answer for exactly {count} pairs without explanation.
-Finally: make sure you return only {count} pair of answers.
Answer:"""
