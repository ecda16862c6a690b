"""boxcert: verify multivariate nonlinear inequalities f(x) < 0 on boxes.

A fast float search proposes a replayable solution certificate; a rigorous
checker re-verifies it with outward-rounded software floating point and a
small set of inference rules (pass, mono, glue, ref).
"""

from .certificates import (CertificateList, FalseNode, GlueNode, MonoNode,
                           MonoStatus, PassMonoNode, PassNode, RefNode,
                           ResultTree, format_certificate_list,
                           parse_certificate_list)
from .checker import (CheckResult, NodeAnnotation, VerifiedFact,
                      annotate_adaptive, check_glue, check_list, check_mono,
                      check_pass)
from .cli import RunConfig, run
from .corpus import CorpusEntry, corpus, corpus_entry
from .expr import (PartialTable, Problem, differentiate, format_problem,
                   parse_problem, partials)
from .fast import FastContext
from .numeric import (DomainError, Interval, PreciseFloat, Precision,
                      RigorousContext, eval_expr_interval, ival_abs_bound,
                      ival_acos, ival_add, ival_atan, ival_div, ival_mul,
                      ival_neg, ival_pow, ival_sqrt, ival_sub, pi_enclosure,
                      round_dir)
from .search import (SearchParams, SearchStats, certificate_search,
                     classify_tree, transform_certificate)
from .taylor import (Domain, TaylorInterval, apply_path, bound_gradient,
                     make_domain, make_taylor_interval, problem_domain,
                     restrict_box, split_box, taylor_lower_bound,
                     taylor_upper_bound)

__version__ = "0.1.0"
