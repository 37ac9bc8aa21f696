"""Ordered-theory toolkit for finite and omega-regular behaviour.

Modules:
  words   -- regular languages of finite words (epsilon-NFA calculus)
  omega   -- omega-regular languages with lasso membership
  kernel  -- generic fixpoint engines, normal forms, law harness
  lts     -- nondeterministic word/Buchi instance with rational terms
  trees   -- top-down tree instance with game-based infinite membership
  prob    -- probabilistic instance with exact and sampling oracles
  cli     -- command-line front end
"""

__version__ = "0.1.0"
