package com.fixture.alpha;

import android.database.sqlite.SQLiteDatabase;
import android.util.Log;

public class Db {
    protected void query(SQLiteDatabase db, String value, String key) {
        String query = "UPDATE "
            + MyDatabase.Table1.TABLE_NAME
            + " SET " + MyDatabase.Table1.COLUMN_NAME_VALUE
            + " = '" + value + "'"
            + " WHERE " + MyDatabase.Table1.COLUMN_NAME_KEY
            + " = '" + key + "'";
        try {
            db.execSQL(query);
        } catch (Exception e) {
            Log.d("E", e.toString());
        } finally {
            currentSnapshotOfTable();
        }
    }

    private void currentSnapshotOfTable() {
    }
}
