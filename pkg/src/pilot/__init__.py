"""PILOT privacy policies: algebra, execution model, and risk analysis."""

from ._version import __version__
from .algebra import (
    dcr_join,
    dcr_subsumes,
    dur_join,
    dur_subsumes,
    policy_join,
    policy_subsumes,
)
from .analysis import (
    AnswerTable,
    CanReceive,
    CanUse,
    CanUseOtherThan,
    IllegalTransferCapability,
    IllegalUseInterest,
    Query,
    RiskAssumption,
    StateGraph,
    Verdict,
    answer,
    answer_matrix,
    enumerate_events,
    explore,
    respects_policy,
)
from .conditions import (
    And,
    Atom,
    BOTTOM,
    Condition,
    Const,
    FF,
    FuncApp,
    ItemRef,
    Not,
    TT,
    TruthValue,
    entails,
    evaluate,
    normalize,
)
from .errors import (
    EvaluationError,
    IncomparableError,
    NotEnabledError,
    PilotError,
    PolicySyntaxError,
    StateBudgetExceededError,
    StoreError,
    UnknownLabelError,
    UnknownSymbolError,
    ValidationError,
)
from .hierarchy import Hierarchy, order_leq, po_min, purpose_cap
from .model import (
    ClockPolicy,
    DataItem,
    Device,
    DeviceKind,
    Event,
    IllegalTransfer,
    IllegalUse,
    Request,
    Send,
    SystemState,
    Transfer,
    Use,
    active_policy,
    active_transfer,
    apply,
    enabled,
    initial_state,
)
from .policy import (
    DataCommunicationRule,
    DataUsageRule,
    Hierarchies,
    PilotPolicy,
)
from .scenario import (
    AnalysisRecord,
    PolicyVariant,
    Question,
    Scenario,
    load_bundled_scenario,
    load_scenario,
    save_record,
    save_scenario,
)
from .text import (
    PolicyDocument,
    parse_condition,
    parse_document,
    parse_policy,
    render_condition,
    render_policy,
)
from .timestamps import Timestamp

__all__ = [name for name in dir() if not name.startswith("_")]
