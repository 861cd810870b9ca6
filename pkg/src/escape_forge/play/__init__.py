from .service import Feedback, PlayService, Session, create_app

__all__ = ["Feedback", "PlayService", "Session", "create_app"]
