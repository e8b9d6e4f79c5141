"""
Error Service - Centralized error handling and logging for the toolkit
"""

import logging
import json
import uuid
from datetime import datetime, timezone
from typing import Dict, Any, Optional, List
from enum import Enum
from dataclasses import dataclass, asdict, field


class ErrorSeverity(Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    VALIDATION = "validation"
    QUADRATURE = "quadrature"
    TRUNCATION = "truncation"
    SINGULARITY = "singularity"
    CONVERGENCE = "convergence"
    CONFIGURATION = "configuration"
    IO = "io"
    VERIFICATION = "verification"
    SYSTEM = "system"


@dataclass
class ErrorContext:
    """Context information for an error"""
    command: Optional[str] = None
    suite: Optional[str] = None
    identity: Optional[str] = None
    parameters: Optional[Dict[str, Any]] = None
    additional_data: Optional[Dict[str, Any]] = None


@dataclass
class ErrorRecord:
    """One logged error as kept in the recent-error list"""
    id: str
    timestamp: str
    message: str
    category: ErrorCategory
    severity: ErrorSeverity
    error_type: str
    context: Optional[ErrorContext] = None
    additional_data: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'timestamp': self.timestamp,
            'message': self.message,
            'category': self.category.value,
            'severity': self.severity.value,
            'type': self.error_type,
            'context': asdict(self.context) if self.context else None,
            'additional_data': self.additional_data or None,
        }


class ErrorService:
    """
    Centralized error handling and logging service
    """

    MAX_RECENT_ERRORS = 100

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.error_stats = self._empty_stats()

    @staticmethod
    def _empty_stats() -> Dict[str, Any]:
        return {
            'total_errors': 0,
            'errors_by_category': {},
            'errors_by_severity': {},
            'recent_errors': []
        }

    def log_error(self,
                  error: Exception,
                  category: ErrorCategory = ErrorCategory.SYSTEM,
                  severity: ErrorSeverity = ErrorSeverity.MEDIUM,
                  context: Optional[ErrorContext] = None,
                  additional_data: Optional[Dict[str, Any]] = None) -> str:
        """Log an error with structured information"""
        record = ErrorRecord(
            id=str(uuid.uuid4()),
            timestamp=datetime.now(timezone.utc).isoformat(),
            message=str(error),
            category=category,
            severity=severity,
            error_type=type(error).__name__,
            context=context,
            additional_data=additional_data or {},
        )

        # Update statistics
        self.error_stats['total_errors'] += 1

        category_key = category.value
        self.error_stats['errors_by_category'][category_key] = \
            self.error_stats['errors_by_category'].get(category_key, 0) + 1

        severity_key = severity.value
        self.error_stats['errors_by_severity'][severity_key] = \
            self.error_stats['errors_by_severity'].get(severity_key, 0) + 1

        recent = self.error_stats['recent_errors']
        recent.append(record.to_dict())
        del recent[:-self.MAX_RECENT_ERRORS]

        # Log based on severity
        log_data = json.dumps(record.to_dict(), indent=2, default=str)
        if severity == ErrorSeverity.CRITICAL:
            self.logger.critical(f"CRITICAL ERROR: {log_data}")
        elif severity == ErrorSeverity.HIGH:
            self.logger.error(f"HIGH SEVERITY ERROR: {log_data}")
        elif severity == ErrorSeverity.MEDIUM:
            self.logger.warning(f"MEDIUM SEVERITY ERROR: {log_data}")
        else:
            self.logger.info(f"LOW SEVERITY ERROR: {log_data}")

        return record.id

    def get_error_stats(self) -> Dict[str, Any]:
        """Get current error statistics"""
        return self.error_stats.copy()

    def get_recent_errors(self, limit: int = 50) -> List[Dict[str, Any]]:
        """Get recent errors"""
        return self.error_stats['recent_errors'][-limit:]

    def clear_stats(self):
        """Clear error statistics (for testing)"""
        self.error_stats = self._empty_stats()

    def create_user_friendly_message(self,
                                     error: Exception,
                                     category: ErrorCategory) -> str:
        """Create user-friendly error message"""
        if category == ErrorCategory.VALIDATION:
            return f"Invalid input: {str(error)}"
        elif category == ErrorCategory.TRUNCATION:
            return f"Integrand has not decayed at the truncation boundary: {str(error)}"
        elif category == ErrorCategory.SINGULARITY:
            return f"Evaluation hit a singularity: {str(error)}"
        elif category in (ErrorCategory.CONVERGENCE, ErrorCategory.QUADRATURE):
            return f"Quadrature did not reach the requested tolerance: {str(error)}"
        elif category == ErrorCategory.CONFIGURATION:
            return f"Configuration problem: {str(error)}"
        elif category == ErrorCategory.IO:
            return f"Could not read or write output: {str(error)}"
        elif category == ErrorCategory.VERIFICATION:
            return f"Verification failed: {str(error)}"
        else:
            return "An unexpected error occurred."


# Global error service instance
error_service = ErrorService()


# Convenience functions
def log_error(error: Exception,
              category: ErrorCategory = ErrorCategory.SYSTEM,
              severity: ErrorSeverity = ErrorSeverity.MEDIUM,
              context: Optional[ErrorContext] = None,
              additional_data: Optional[Dict[str, Any]] = None) -> str:
    """Convenience function to log an error"""
    return error_service.log_error(error, category, severity, context, additional_data)


def create_error_context(**kwargs) -> ErrorContext:
    """Create error context from additional data"""
    # Filter kwargs to only include valid ErrorContext fields
    valid_fields = {'command', 'suite', 'identity', 'parameters', 'additional_data'}

    filtered_kwargs = {}
    additional_data = {}

    for key, value in kwargs.items():
        if key in valid_fields:
            filtered_kwargs[key] = value
        else:
            additional_data[key] = value

    if additional_data:
        filtered_kwargs['additional_data'] = additional_data

    return ErrorContext(**filtered_kwargs)


def categorize_error(error: Exception) -> ErrorCategory:
    """Map a toolkit exception onto an error category by its class name"""
    names = {cls.__name__ for cls in type(error).__mro__}
    if 'ValidationError' in names or 'UsageError' in names or isinstance(error, ValueError):
        return ErrorCategory.VALIDATION
    if 'TruncationError' in names:
        return ErrorCategory.TRUNCATION
    if 'SingularityError' in names:
        return ErrorCategory.SINGULARITY
    if 'ConvergenceError' in names or 'BracketConvergenceError' in names:
        return ErrorCategory.CONVERGENCE
    if 'QuadratureError' in names:
        return ErrorCategory.QUADRATURE
    if 'ToleranceConfigurationError' in names:
        return ErrorCategory.CONFIGURATION
    if 'FieldIOError' in names or isinstance(error, OSError):
        return ErrorCategory.IO
    return ErrorCategory.SYSTEM


# Error handler decorators
def handle_errors(category: Optional[ErrorCategory] = None,
                  severity: ErrorSeverity = ErrorSeverity.MEDIUM):
    """Decorator that logs any exception through the error service and re-raises it"""
    def decorator(func):
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                log_error(e, category or categorize_error(e), severity,
                          create_error_context(identity=func.__name__))
                raise
        wrapper.__name__ = func.__name__
        wrapper.__doc__ = func.__doc__
        return wrapper
    return decorator
