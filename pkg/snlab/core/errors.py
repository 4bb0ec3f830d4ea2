class SNLabError(Exception):
    """Error raised by snlab operations"""

    # error_type -> CLI exit code
    EXIT_CODES = {
        "argument": 2,
        "domain": 2,
        "divergence": 2,
        "validation": 2,
        "threshold": 1,
        "resource": 3,
        "internal": 3,
    }

    def __init__(self, message: str, error_type: str = "argument", module: str = "unknown"):
        self.message = message
        self.error_type = error_type
        self.module = module
        super().__init__(self.message)

    @property
    def exit_code(self) -> int:
        return self.EXIT_CODES.get(self.error_type, 3)

    def __str__(self) -> str:
        return f"[{self.module}:{self.error_type}] {self.message}"
