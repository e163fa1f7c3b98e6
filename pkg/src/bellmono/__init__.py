"""Bell monogamy relations for qubit networks."""
from .topology import Hypergraph, cyclic_hypergraph, enumerate_hypergraphs, find_embeddings
from .pauli import PauliString, PartitionCertificate, verify_certificate, search_partition
from .relations import (ElementaryRelation, MonogamyRelation, builtin_catalog, catalog_lookup,
                        optimal_fractional_cover, averaging_sum, lift_relation)
from .simulator import QuantumEnsemble, correlation_tensor, max_bell_settings, wwzb_value
from .tightness import optimize_relation, elementary_search, cyclic_obstruction, check_marginal_lemma

__version__ = "0.1.0"
