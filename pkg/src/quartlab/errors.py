class BudgetExceeded(RuntimeError):
    """A request needs more terms, grid points or memory than its budget allows."""

    def __init__(self, what: str, needed, budget):
        super().__init__(f"{what}: needs {needed}, budget {budget}")
        self.what = what
        self.needed = needed
        self.budget = budget

    def to_record(self) -> dict:
        return {"error": "budget_exceeded", "what": self.what,
                "needed": str(self.needed), "budget": str(self.budget)}
