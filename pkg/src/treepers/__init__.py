"""Merge trees, barcodes and optimal transport of persistence diagrams for
scalar fields on metric graphs."""

__version__ = "0.1.0"

from ._errors import InvalidInputError, NumericalFailureError
from .domain import (MetricGraph, ScalarField, cycle_graph, gen_distance_to_net,
                     gen_fbm, gen_random_fourier, graph_distance, grid_graph,
                     maximal_packing, path_graph, path_graph_from_spacings,
                     smooth_bump)
from .tree import (MarkedInterval, MergeTree, approximate_from_tree,
                   build_merge_tree, canonical_form, cascade_tree,
                   compose_intervals, df_distance, df_matrix, distortion_bound,
                   dyck_path, leaf_count, random_merge_tree, total_length, trim,
                   unit_edge_tree)
from .barcode import (Bar, Diagram, IndexEstimate, barcode_from_field,
                      barcode_from_tree, box_dimension, covering_number,
                      elder_rule_barcode, mellin_pers_p, p_variation, pers_p,
                      persistence_index, variation_index)
from .transport import (PersistenceMeasure, TransportPlan, bottleneck,
                        coupled_cost, mean_measure, to_measure,
                        wasserstein_between_distributions, wasserstein_p)

__all__ = [name for name, obj in dict(globals()).items()
           if not name.startswith("_") and not isinstance(obj, type(_errors))]
