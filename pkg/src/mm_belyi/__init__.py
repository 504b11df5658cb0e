from mm_belyi.ansatz import BelyiAnsatz as BelyiAnsatz
from mm_belyi.ansatz import FactorRole as FactorRole
from mm_belyi.ansatz import FactorSpec as FactorSpec
from mm_belyi.ansatz import Gauge as Gauge
from mm_belyi.ansatz import NormalizationSpec as NormalizationSpec
from mm_belyi.ansatz import build_ansatz as build_ansatz
from mm_belyi.ansatz import jacobian as jacobian
from mm_belyi.ansatz import normalization_equation as normalization_equation
from mm_belyi.ansatz import residual as residual
from mm_belyi.bigsolve import NumericSolution as NumericSolution
from mm_belyi.bigsolve import multistart_search as multistart_search
from mm_belyi.bigsolve import newton_refine as newton_refine
from mm_belyi.bigsolve import solution_from_values as solution_from_values
from mm_belyi.errors import BelyiError as BelyiError
from mm_belyi.exactnf import CertifiedBelyiMap as CertifiedBelyiMap
from mm_belyi.exactnf import FieldElement as FieldElement
from mm_belyi.exactnf import NumberField as NumberField
from mm_belyi.exactnf import certify_map as certify_map
from mm_belyi.exactnf import verify_map as verify_map
from mm_belyi.lattice import algdep as algdep
from mm_belyi.lattice import field_membership as field_membership
from mm_belyi.lattice import lll_reduce as lll_reduce
from mm_belyi.monodromy import monodromy_triple as monodromy_triple
from mm_belyi.perm import CycleType as CycleType
from mm_belyi.perm import Permutation as Permutation
from mm_belyi.perm import PermutationTriple as PermutationTriple
from mm_belyi.perm import gamma0_triple as gamma0_triple
from mm_belyi.perm import group_order as group_order
from mm_belyi.perm import simultaneously_conjugate as simultaneously_conjugate
from mm_belyi.triple import SubgroupProfile as SubgroupProfile
from mm_belyi.triple import Verdict as Verdict
from mm_belyi.triple import analyze as analyze
from mm_belyi.triple import hsu_congruence_test as hsu_congruence_test
from mm_belyi.triple import profile as profile
from mm_belyi.types import MultistartConfig as MultistartConfig
from mm_belyi.types import PrecisionConfig as PrecisionConfig
from mm_belyi.types import RecognitionConfig as RecognitionConfig
from mm_belyi.types import TrackingConfig as TrackingConfig
