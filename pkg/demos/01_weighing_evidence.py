"""
Weighing conflicting evidence for a single statement
====================================================

One atomic statement, two retrieved passages: the first supports it, the
second contradicts it.  Each passage becomes a binary variable with a high
prior of being true, and each judged relation becomes a pairwise factor.
Exact inference then tells us how much to believe the statement.
"""

from factreason import AtomRecord, ContextRecord, RelationEdge, FR3, build_fr_model, ve_marginals
from factreason.model_builder import relation_factor, table1_rows

atom = AtomRecord("a1", "The bridge opened in 1932.")
support = ContextRecord("C1", content="Records show the bridge opened in 1932.")
against = ContextRecord("C2", content="The bridge did not open until 1936.")

edges = [
    RelationEdge("C1", "a1", "entail", 0.8),
    RelationEdge("C2", "a1", "contradict", 0.9),
]

# %%
# The factors.  Rows are (x,y), (x,~y), (~x,y), (~x,~y) for source x and target y:
# an entailing source penalises "source true, target false", a contradicting
# source penalises "both true".
for e in edges:
    print(e.relation.value.ljust(10), table1_rows(relation_factor(e, 0, 1)))

# %%
model, ids = build_fr_model([atom], [support, against], edges, FR3)
p = ve_marginals(model).marginals.p_true(ids["a1"])
print(f"P(statement true) = {p:.4f}")  # the stronger contradiction wins: ~0.32

# %%
# A third passage now casts doubt on the contradicting one.  Its effect flows
# through C2 back to the statement, so belief in the statement rises.  The
# stronger the doubt, the larger the rise.
doubt = ContextRecord("C3", content="The 1936 date refers to a later renovation.")
for strength in (0.6, 0.8, 0.9, 0.99):
    more = edges + [RelationEdge("C3", "C2", "contradict", strength)]
    model, ids = build_fr_model([atom], [support, against, doubt], more, FR3)
    print(f"doubt p*={strength:<5} P(statement true) = {ve_marginals(model).marginals.p_true(ids['a1']):.4f}")
