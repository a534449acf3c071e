"""
Learnable softmax temperature, parameterised as log τ so that τ > 0 always.
"""

from __future__ import annotations

import math
from typing import Dict

from config import constants
from ndmath import Tensor, functional as F, parameter


class Temperature:
    """可学习温度 τ = exp(log_tau)，初始 τ = 0.07"""

    name = "temperature.log_tau"

    def __init__(self, tau: float = constants.INITIAL_TEMPERATURE):
        self.log_tau = parameter([math.log(tau)], name=self.name)

    @property
    def tau(self) -> float:
        return math.exp(self.log_tau.item())

    def inverse(self) -> Tensor:
        """1/τ 作为可微张量"""
        return F.exp(-self.log_tau)

    def parameters(self) -> Dict[str, Tensor]:
        return {self.name: self.log_tau}

    @classmethod
    def fixed(cls, tau: float) -> "Temperature":
        return cls(tau=tau)
